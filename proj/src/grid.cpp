#include "heisenvar/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "heisenvar/parallel.hpp"
#include "json.hpp"

namespace heisenvar {

Grid::Grid(std::array<std::array<double, 2>, 3> bounds, std::array<int, 3> resolution)
    : bounds_(bounds), res_(resolution) {
    for (int a = 0; a < 3; ++a) {
        if (res_[a] < 3) throw std::invalid_argument("Grid: resolution must be >= 3 per axis");
        if (!(bounds_[a][1] > bounds_[a][0]))
            throw std::invalid_argument("Grid: empty bounds interval");
        h_[a] = (bounds_[a][1] - bounds_[a][0]) / (res_[a] - 1);
    }
    count_ = static_cast<std::size_t>(res_[0]) * res_[1] * res_[2];
}

GridPtr Grid::make_box(double half_x, double half_y, double half_t, int nx, int ny, int nt) {
    return std::make_shared<Grid>(
        std::array<std::array<double, 2>, 3>{{{-half_x, half_x}, {-half_y, half_y}, {-half_t, half_t}}},
        std::array<int, 3>{nx, ny, nt});
}

bool Grid::same_layout(const Grid& other) const {
    return bounds_ == other.bounds_ && res_ == other.res_;
}

DomainMask::DomainMask(GridPtr grid, std::vector<std::uint8_t> inside)
    : grid_(std::move(grid)), inside_(std::move(inside)) {
    if (inside_.size() != grid_->node_count())
        throw std::invalid_argument("DomainMask: flag count mismatch");
    // Zero trace: the outermost node layer is always outside.
    const auto& res = grid_->resolution();
    interior_count_ = 0;
    for (std::size_t i = 0; i < inside_.size(); ++i) {
        int ix, iy, it;
        grid_->coords(i, ix, iy, it);
        const bool edge = ix == 0 || iy == 0 || it == 0 || ix == res[0] - 1 || iy == res[1] - 1 ||
                          it == res[2] - 1;
        if (edge) inside_[i] = 0;
        if (inside_[i]) ++interior_count_;
    }
    if (interior_count_ == 0)
        throw std::invalid_argument("DomainMask: no interior nodes");
}

std::shared_ptr<const DomainMask> DomainMask::full_box(GridPtr grid) {
    return from_predicate(std::move(grid), [](const Point3&) { return true; });
}

std::shared_ptr<const DomainMask> DomainMask::koranyi_ball(GridPtr grid, const Point3& center,
                                                           double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("koranyi_ball: radius must be positive");
    return from_predicate(std::move(grid), [center, radius](const Point3& p) {
        return gauge3(compose3(inverse3(center), p)) < radius;
    });
}

std::shared_ptr<const DomainMask> DomainMask::ellipsoid(GridPtr grid, const Point3& center,
                                                        double ax, double ay, double at) {
    if (!(ax > 0.0 && ay > 0.0 && at > 0.0))
        throw std::invalid_argument("ellipsoid: semi-axes must be positive");
    return from_predicate(std::move(grid), [=](const Point3& p) {
        const double dx = (p.x - center.x) / ax;
        const double dy = (p.y - center.y) / ay;
        const double dt = (p.t - center.t) / at;
        return dx * dx + dy * dy + dt * dt < 1.0;
    });
}

std::shared_ptr<const DomainMask> DomainMask::from_predicate(
    GridPtr grid, const std::function<bool(const Point3&)>& pred) {
    std::vector<std::uint8_t> flags(grid->node_count(), 0);
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = pred(grid->node(i)) ? 1 : 0;
    return std::make_shared<DomainMask>(std::move(grid), std::move(flags));
}

double DomainMask::volume() const { return interior_count_ * grid_->cell_volume(); }

bool DomainMask::is_boundary_adjacent(std::size_t idx) const {
    if (!inside(idx)) return false;
    int ix, iy, it;
    grid_->coords(idx, ix, iy, it);
    const auto& res = grid_->resolution();
    auto out = [&](int jx, int jy, int jt) {
        if (jx < 0 || jy < 0 || jt < 0 || jx >= res[0] || jy >= res[1] || jt >= res[2]) return true;
        return !inside(grid_->index(jx, jy, jt));
    };
    return out(ix - 1, iy, it) || out(ix + 1, iy, it) || out(ix, iy - 1, it) ||
           out(ix, iy + 1, it) || out(ix, iy, it - 1) || out(ix, iy, it + 1);
}

Field::Field(GridPtr g, MaskPtr m) : grid(std::move(g)), mask(std::move(m)) {
    if (!grid || !mask) throw std::invalid_argument("Field: null grid or mask");
    if (&mask->grid() != grid.get() && !mask->grid().same_layout(*grid))
        throw std::invalid_argument("Field: mask grid mismatch");
    values.assign(grid->node_count(), 0.0);
}

Field field_from_function(GridPtr grid, MaskPtr mask,
                          const std::function<double(const Point3&)>& f) {
    Field u(std::move(grid), std::move(mask));
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!u.mask->inside(i)) continue;
        const double v = f(u.grid->node(i));
        if (!std::isfinite(v))
            throw std::runtime_error("field_from_function: non-finite sample");
        u.values[i] = v;
    }
    return u;
}

double quadrature_lp(const Field& u, double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("quadrature_lp: p must be finite and >= 1");
    const double vol = u.grid->cell_volume();
    const double* v = u.values.data();
    const std::size_t n = u.size();
    double s;
    if (p == 2.0) {
        s = parallel_sum(n, [v](std::size_t i) { return v[i] * v[i]; });
    } else if (p == 4.0) {
        s = parallel_sum(n, [v](std::size_t i) {
            const double q = v[i] * v[i];
            return q * q;
        });
    } else {
        s = parallel_sum(n, [v, p](std::size_t i) {
            return v[i] == 0.0 ? 0.0 : std::pow(std::abs(v[i]), p);
        });
    }
    return s * vol;
}

double pairing(const Field& u, const Field& v) {
    if (!u.grid->same_layout(*v.grid))
        throw std::invalid_argument("pairing: grid mismatch");
    const double* a = u.values.data();
    const double* b = v.values.data();
    return u.grid->cell_volume() *
           parallel_sum(u.size(), [a, b](std::size_t i) { return a[i] * b[i]; });
}

Field axpy(double alpha, const Field& x, const Field& y) {
    if (!x.grid->same_layout(*y.grid)) throw std::invalid_argument("axpy: grid mismatch");
    Field out = y;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += alpha * x.values[i];
    return out;
}

Field scale(double alpha, const Field& x) {
    Field out = x;
    for (double& v : out.values) v *= alpha;
    return out;
}

double linf_norm(const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

std::size_t argmax_abs(const Field& u) {
    std::size_t best = 0;
    double m = -1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::abs(u.values[i]);
        if (a > m) {
            m = a;
            best = i;
        }
    }
    return best;
}

// ---- HSF1 persistence -------------------------------------------------------

namespace {
void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("HSF1: truncated header length");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void save_field(const Field& u, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_field: cannot open " + path);

    nlohmann::json hdr;
    hdr["version"] = 1;
    hdr["n"] = 1;
    const auto& b = u.grid->bounds();
    hdr["bounds"] = {{b[0][0], b[0][1]}, {b[1][0], b[1][1]}, {b[2][0], b[2][1]}};
    const auto& r = u.grid->resolution();
    hdr["resolution"] = {r[0], r[1], r[2]};
    hdr["mask"] = "embedded";
    const std::string hs = hdr.dump();

    os.write("HSF1", 4);
    put_u32(os, static_cast<std::uint32_t>(hs.size()));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));

    const auto& flags = u.mask->flags();
    os.write(reinterpret_cast<const char*>(flags.data()),
             static_cast<std::streamsize>(flags.size()));

    static_assert(sizeof(double) == 8);
    os.write(reinterpret_cast<const char*>(u.values.data()),
             static_cast<std::streamsize>(u.values.size() * 8));
    if (!os) throw std::runtime_error("save_field: write failure for " + path);
}

Field load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_field: cannot open " + path);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "HSF1", 4) != 0)
        throw std::runtime_error("load_field: bad magic bytes in " + path);

    const std::uint32_t hlen = get_u32(is);
    std::string hs(hlen, '\0');
    is.read(hs.data(), hlen);
    if (!is) throw std::runtime_error("load_field: truncated header in " + path);

    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(hs);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("load_field: header parse error: ") + e.what());
    }
    if (hdr.value("version", 0) != 1)
        throw std::runtime_error("load_field: unsupported version in " + path);
    if (hdr.value("n", 0) != 1) throw std::runtime_error("load_field: unsupported n in " + path);

    std::array<std::array<double, 2>, 3> bounds{};
    for (int a = 0; a < 3; ++a) {
        bounds[a][0] = hdr["bounds"][a][0].get<double>();
        bounds[a][1] = hdr["bounds"][a][1].get<double>();
    }
    std::array<int, 3> res{};
    for (int a = 0; a < 3; ++a) res[a] = hdr["resolution"][a].get<int>();

    auto grid = std::make_shared<Grid>(bounds, res);
    const std::size_t n = grid->node_count();

    std::vector<std::uint8_t> flags(n);
    is.read(reinterpret_cast<char*>(flags.data()), static_cast<std::streamsize>(n));
    if (!is || static_cast<std::size_t>(is.gcount()) != n)
        throw std::runtime_error("load_field: mask payload length mismatch in " + path);

    auto mask = std::make_shared<DomainMask>(grid, std::move(flags));
    Field u(grid, mask);
    is.read(reinterpret_cast<char*>(u.values.data()), static_cast<std::streamsize>(n * 8));
    if (!is || static_cast<std::size_t>(is.gcount()) != n * 8)
        throw std::runtime_error("load_field: value payload length mismatch in " + path);
    return u;
}

}  // namespace heisenvar
