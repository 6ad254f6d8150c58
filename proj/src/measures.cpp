#include "heisenvar/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "heisenvar/hdiff.hpp"
#include "heisenvar/parallel.hpp"

namespace heisenvar {

double EnergyMeasure::density_mass() const { return quadrature_lp(density, 1.0); }

double EnergyMeasure::atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
}

void validate_xpair(const XPair& p, double slack) {
    if (!p.u.grid->same_layout(*p.mu.density.grid))
        throw std::invalid_argument("XPair: field and measure live on different grids");
    HorizontalField g = horizontal_gradient(p.u);
    double scale = 0.0;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double d = g.z1[i] * g.z1[i] + g.z2[i] * g.z2[i];
        scale = std::max(scale, d);
    }
    const double tol = slack * std::max(1.0, scale);
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double d = g.z1[i] * g.z1[i] + g.z2[i] * g.z2[i];
        if (p.mu.density.values[i] < d - tol)
            throw std::invalid_argument("XPair: measure density does not dominate |D_H u|^2");
    }
    if (p.mu.total_mass() > 1.0 + slack)
        throw std::invalid_argument("XPair: measure mass exceeds 1");
    for (const auto& a : p.mu.atoms)
        if (!(a.weight > 0.0)) throw std::invalid_argument("XPair: nonpositive atom weight");
}

EnergyMeasure energy_density(const Field& u) {
    HorizontalField g = horizontal_gradient(u);
    EnergyMeasure m;
    m.density = Field(u.grid, u.mask);
    for (std::size_t i = 0; i < u.size(); ++i)
        m.density.values[i] = g.z1[i] * g.z1[i] + g.z2[i] * g.z2[i];
    return m;
}

EnergyMeasure lp_density(const Field& u, double p) {
    EnergyMeasure m;
    m.density = Field(u.grid, u.mask);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = std::abs(u.values[i]);
        m.density.values[i] = v == 0.0 ? 0.0 : std::pow(v, p);
    }
    return m;
}

double ball_density_mass(const Field& density, const Point3& center, double radius) {
    const Grid& grid = *density.grid;
    const auto& res = grid.resolution();
    const auto& h = grid.spacing();
    const auto& b = grid.bounds();

    // bounding window: |dx|,|dy| <= radius; |dt + shear| <= radius^2 with
    // |shear| <= 2*radius*(|cx|+|cy|)
    const double r2 = radius * radius;
    const double tslack = r2 + 2.0 * radius * (std::abs(center.x) + std::abs(center.y));
    const int ix0 = std::max(0, static_cast<int>(std::floor((center.x - radius - b[0][0]) / h[0])));
    const int ix1 = std::min(res[0] - 1, static_cast<int>(std::ceil((center.x + radius - b[0][0]) / h[0])));
    const int iy0 = std::max(0, static_cast<int>(std::floor((center.y - radius - b[1][0]) / h[1])));
    const int iy1 = std::min(res[1] - 1, static_cast<int>(std::ceil((center.y + radius - b[1][0]) / h[1])));
    const int it0 = std::max(0, static_cast<int>(std::floor((center.t - tslack - b[2][0]) / h[2])));
    const int it1 = std::min(res[2] - 1, static_cast<int>(std::ceil((center.t + tslack - b[2][0]) / h[2])));

    double mass = 0.0;
    for (int it = it0; it <= it1; ++it)
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix) {
                const std::size_t idx = grid.index(ix, iy, it);
                const double d = density.values[idx];
                if (d == 0.0) continue;
                const Point3 p = grid.node(ix, iy, it);
                if (gauge3(compose3(inverse3(center), p)) < radius) mass += d;
            }
    return mass * grid.cell_volume();
}

namespace {

struct BallScan {
    std::size_t center_idx = 0;
    double mass = -1.0;
};

// heaviest Koranyi ball of the given radius, centers on interior nodes
BallScan heaviest_ball(const Field& density, double radius) {
    const Grid& grid = *density.grid;
    const std::size_t n = grid.node_count();
    const int nt = thread_count();
    std::vector<BallScan> best(static_cast<std::size_t>(std::max(nt, 1)));

    const std::size_t chunk = (n + best.size() - 1) / best.size();
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < best.size(); ++w) {
        const std::size_t b0 = w * chunk, b1 = std::min(n, b0 + chunk);
        if (b0 >= b1) break;
        pool.emplace_back([&, w, b0, b1] {
            BallScan local;
            for (std::size_t i = b0; i < b1; ++i) {
                if (!density.mask->inside(i)) continue;
                if (density.values[i] == 0.0) continue;  // cheap prefilter
                const double m = ball_density_mass(density, grid.node(i), radius);
                if (m > local.mass || (m == local.mass && i < local.center_idx)) {
                    local.mass = m;
                    local.center_idx = i;
                }
            }
            best[w] = local;
        });
    }
    for (auto& th : pool) th.join();

    BallScan out;
    for (const auto& c : best)
        if (c.mass > out.mass || (c.mass == out.mass && c.center_idx < out.center_idx)) out = c;
    return out;
}

}  // namespace

EnergyMeasure detect_atoms(const EnergyMeasure& m, double ball_radius, double mass_threshold,
                           int max_atoms) {
    if (!(ball_radius > 0.0)) throw std::invalid_argument("detect_atoms: radius must be positive");
    if (!(mass_threshold > 0.0 && mass_threshold < 1.0))
        throw std::invalid_argument("detect_atoms: threshold must be in (0,1)");

    EnergyMeasure out = m;
    const Grid& grid = *out.density.grid;
    const double vol = grid.cell_volume();

    for (int k = 0; k < max_atoms; ++k) {
        const BallScan scan = heaviest_ball(out.density, ball_radius);
        if (scan.mass < mass_threshold) break;

        const Point3 c = grid.node(scan.center_idx);
        // barycenter + exact removed mass
        double wx = 0.0, wy = 0.0, wt = 0.0, wsum = 0.0;
        const std::size_t n = grid.node_count();
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = out.density.values[i];
            if (d == 0.0) continue;
            const Point3 p = grid.node(i);
            if (gauge3(compose3(inverse3(c), p)) >= ball_radius) continue;
            members.push_back(i);
            wsum += d;
            wx += d * p.x;
            wy += d * p.y;
            wt += d * p.t;
        }
        if (wsum <= 0.0) break;
        Atom atom;
        atom.weight = wsum * vol;
        atom.location = {wx / wsum, wy / wsum, wt / wsum};
        for (std::size_t i : members) out.density.values[i] = 0.0;
        out.atoms.push_back(atom);
    }
    return out;
}

double F_eps(const Field& u, double eps) {
    const GroupParams params(1);
    const double crit = params.crit_exp();
    if (!(eps >= 0.0) || !(eps < crit - 2.0))
        throw std::invalid_argument("F_eps: eps must lie in [0, 2*-2)");
    return quadrature_lp(u, crit - eps);
}

double gamma_limit_F(const XPair& p, double s_star) {
    validate_xpair(p);
    const GroupParams params(1);
    double atom_term = 0.0;
    for (const auto& a : p.mu.atoms) atom_term += std::pow(a.weight, params.crit_exp() / 2.0);
    return quadrature_lp(p.u, params.crit_exp()) + s_star * atom_term;
}

BoundCheck sstar_bound_check(const XPair& p, double s_star, double tol) {
    const double value = gamma_limit_F(p, s_star);
    const double mass = p.mu.total_mass();
    const GroupParams params(1);
    BoundCheck out;
    out.value = value;
    out.bound = s_star * std::pow(mass, params.crit_exp() / 2.0) * (1.0 + tol);
    out.margin = out.bound - value;
    out.ok = out.margin >= 0.0;
    return out;
}

CcaReport cca_check(const std::vector<Field>& sequence, double ball_radius, double theta,
                    double s_star, double slack) {
    if (sequence.size() < 2) throw std::invalid_argument("cca_check: need at least 2 fields");
    for (std::size_t k = 1; k < sequence.size(); ++k)
        if (!sequence[k].grid->same_layout(*sequence[0].grid))
            throw std::invalid_argument("cca_check: fields on different grids");

    const Field& last = sequence.back();
    const GroupParams params(1);
    EnergyMeasure mu = detect_atoms(energy_density(last), ball_radius, theta);
    EnergyMeasure nu = detect_atoms(lp_density(last, params.crit_exp()), ball_radius,
                                    theta * s_star);  // nu scale is s_star per unit mu

    CcaReport rep;
    std::vector<bool> used(mu.atoms.size(), false);
    for (const auto& na : nu.atoms) {
        int best = -1;
        double bestd = INFINITY;
        for (std::size_t j = 0; j < mu.atoms.size(); ++j) {
            if (used[j]) continue;
            const double d = gauge3(compose3(inverse3(mu.atoms[j].location), na.location));
            if (d < bestd) {
                bestd = d;
                best = static_cast<int>(j);
            }
        }
        CcaPairVerdict v;
        v.nu_weight = na.weight;
        v.location = na.location;
        if (best < 0 || bestd > 2.0 * ball_radius) {
            v.paired = false;
            v.ok = false;
            ++rep.unpaired;
        } else {
            used[static_cast<std::size_t>(best)] = true;
            v.mu_weight = mu.atoms[static_cast<std::size_t>(best)].weight;
            const double bound =
                s_star * std::pow(v.mu_weight, params.crit_exp() / 2.0) * (1.0 + slack);
            v.ratio = v.nu_weight /
                      (s_star * std::pow(v.mu_weight, params.crit_exp() / 2.0));
            v.ok = v.nu_weight <= bound;
        }
        rep.pairs.push_back(v);
    }
    for (std::size_t j = 0; j < mu.atoms.size(); ++j)
        if (!used[j]) ++rep.unpaired;
    rep.all_ok = rep.unpaired == 0 &&
                 std::all_of(rep.pairs.begin(), rep.pairs.end(),
                             [](const CcaPairVerdict& v) { return v.ok; });
    return rep;
}

// ---- fixed test bank ---------------------------------------------------------

int test_bank_size() { return 16; }

namespace {
// bump centers in box-normalized coordinates [-1,1]^3
constexpr double kBumpCenters[8][3] = {
    {-0.45, -0.45, -0.45}, {0.45, -0.45, -0.45}, {-0.45, 0.45, -0.45}, {0.45, 0.45, -0.45},
    {-0.45, -0.45, 0.45},  {0.45, -0.45, 0.45},  {-0.45, 0.45, 0.45},  {0.45, 0.45, 0.45}};
constexpr double kBumpRadius = 0.85;

constexpr int kCosModes[8][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0},
                                 {1, 0, 1}, {0, 1, 1}, {1, 1, 1}, {2, 1, 0}};
}  // namespace

double test_bank_value(const Grid& grid, int index, const Point3& p) {
    const auto& b = grid.bounds();
    const double X = (p.x - 0.5 * (b[0][0] + b[0][1])) / (0.5 * (b[0][1] - b[0][0]));
    const double Y = (p.y - 0.5 * (b[1][0] + b[1][1])) / (0.5 * (b[1][1] - b[1][0]));
    const double T = (p.t - 0.5 * (b[2][0] + b[2][1])) / (0.5 * (b[2][1] - b[2][0]));
    if (index < 0 || index >= 16) throw std::invalid_argument("test_bank_value: bad index");
    if (index < 8) {
        const double dx = X - kBumpCenters[index][0];
        const double dy = Y - kBumpCenters[index][1];
        const double dt = T - kBumpCenters[index][2];
        const double s2 = (dx * dx + dy * dy + dt * dt) / (kBumpRadius * kBumpRadius);
        if (s2 >= 1.0) return 0.0;
        const double q = 1.0 - s2;
        return q * q * q;
    }
    const int* m = kCosModes[index - 8];
    const double fx = (1.2 + std::cos(M_PI * m[0] * X)) / 2.2;
    const double fy = (1.2 + std::cos(M_PI * m[1] * Y)) / 2.2;
    const double ft = (1.2 + std::cos(M_PI * m[2] * T)) / 2.2;
    return fx * fy * ft;
}

Field test_bank_field(GridPtr grid, MaskPtr mask, int index) {
    const Grid& g = *grid;
    return field_from_function(std::move(grid), std::move(mask),
                               [&g, index](const Point3& p) { return test_bank_value(g, index, p); });
}

std::vector<double> weak_star_pairings(const EnergyMeasure& m) {
    const Grid& grid = *m.density.grid;
    std::vector<double> out(static_cast<std::size_t>(test_bank_size()), 0.0);
    const double vol = grid.cell_volume();
    for (int k = 0; k < test_bank_size(); ++k) {
        const double* d = m.density.values.data();
        double s = parallel_sum(grid.node_count(), [&, d](std::size_t i) {
            return d[i] == 0.0 ? 0.0 : d[i] * test_bank_value(grid, k, grid.node(i));
        });
        s *= vol;
        for (const auto& a : m.atoms) s += a.weight * test_bank_value(grid, k, a.location);
        out[static_cast<std::size_t>(k)] = s;
    }
    return out;
}

std::vector<double> field_pairings(const Field& u) {
    const Grid& grid = *u.grid;
    std::vector<double> out(static_cast<std::size_t>(test_bank_size()), 0.0);
    const double vol = grid.cell_volume();
    const double* v = u.values.data();
    for (int k = 0; k < test_bank_size(); ++k) {
        double s = parallel_sum(grid.node_count(), [&, v](std::size_t i) {
            return v[i] == 0.0 ? 0.0 : v[i] * test_bank_value(grid, k, grid.node(i));
        });
        out[static_cast<std::size_t>(k)] = s * vol;
    }
    return out;
}

ConcReport concentration_report(const Field& u, const std::vector<double>& radii) {
    EnergyMeasure m = energy_density(u);
    const double total = m.density_mass();
    if (!(total > 0.0)) throw std::invalid_argument("concentration_report: zero field");

    const Grid& grid = *u.grid;
    const std::size_t peak_idx = argmax_abs(m.density);
    ConcReport rep;
    rep.peak = grid.node(peak_idx);
    rep.peak_boundary = u.mask->is_boundary_adjacent(peak_idx);
    // "boundary" also when within 2h of the mask edge in any axis direction
    if (!rep.peak_boundary) {
        int ix, iy, it;
        grid.coords(peak_idx, ix, iy, it);
        const auto& res = grid.resolution();
        auto near_edge = [&](int jx, int jy, int jt) {
            if (jx < 0 || jy < 0 || jt < 0 || jx >= res[0] || jy >= res[1] || jt >= res[2])
                return true;
            return !u.mask->inside(grid.index(jx, jy, jt));
        };
        for (int d = 1; d <= 2 && !rep.peak_boundary; ++d)
            rep.peak_boundary = near_edge(ix - d, iy, it) || near_edge(ix + d, iy, it) ||
                                near_edge(ix, iy - d, it) || near_edge(ix, iy + d, it) ||
                                near_edge(ix, iy, it - d) || near_edge(ix, iy, it + d);
    }

    rep.radii = radii;
    for (double r : radii)
        rep.fractions.push_back(ball_density_mass(m.density, rep.peak, r) / total);
    rep.weak_pairings = weak_star_pairings(m);
    return rep;
}

double mask_diameter(const DomainMask& mask) {
    const Grid& grid = mask.grid();
    double sx = 0.0, sy = 0.0, st = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (!mask.inside(i)) continue;
        const Point3 p = grid.node(i);
        sx += p.x;
        sy += p.y;
        st += p.t;
        ++count;
    }
    const Point3 bary{sx / count, sy / count, st / count};
    double rmax = 0.0;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (!mask.inside(i)) continue;
        rmax = std::max(rmax, gauge3(compose3(inverse3(bary), grid.node(i))));
    }
    return 2.0 * rmax;
}

}  // namespace heisenvar
