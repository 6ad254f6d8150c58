#include "heisenvar/hdiff.hpp"

#include <cmath>
#include <stdexcept>

#include "heisenvar/parallel.hpp"

namespace heisenvar {

namespace {
// difference pattern per axis
enum Pattern : std::uint8_t { kCentered = 0, kLeftOut = 1, kRightOut = 2 };

inline int pat(std::uint8_t packed, int axis) { return (packed >> (2 * axis)) & 0x3; }
}  // namespace

KohnOperator::KohnOperator(MaskPtr mask) : mask_(std::move(mask)), grid_(mask_->grid_ptr()) {
    const auto& res = grid_->resolution();
    const std::size_t n = grid_->node_count();
    pattern_.assign(n, 0);

    const std::ptrdiff_t sx = 1;
    const std::ptrdiff_t sy = res[0];
    const std::ptrdiff_t st = static_cast<std::ptrdiff_t>(res[0]) * res[1];
    const std::ptrdiff_t stride[3] = {sx, sy, st};

    for (std::size_t i = 0; i < n; ++i) {
        if (!mask_->inside(i)) continue;
        std::uint8_t packed = 0;
        for (int a = 0; a < 3; ++a) {
            // interior nodes are never on the grid edge, so both neighbors exist
            const bool lin = mask_->inside(i - stride[a]);
            const bool rin = mask_->inside(i + stride[a]);
            std::uint8_t p;
            if (lin && rin) p = kCentered;
            else if (!lin && rin) p = kLeftOut;
            else p = kRightOut;  // right outside, or isolated in this axis
            packed |= p << (2 * a);
        }
        pattern_[i] = packed;
    }

    // diag(L) = sum over rows r of D1[r,i]^2 + D2[r,i]^2
    const auto& h = grid_->spacing();
    diag_.assign(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        if (!mask_->inside(r)) continue;
        const Point3 p = grid_->node(r);
        const std::uint8_t pk = pattern_[r];
        // (column offset, D1 coefficient, D2 coefficient)
        const double cx[2] = {1.0 / h[0], 1.0 / (2.0 * h[0])};
        const double cy[2] = {1.0 / h[1], 1.0 / (2.0 * h[1])};
        const double ct[2] = {1.0 / h[2], 1.0 / (2.0 * h[2])};
        double own1 = 0.0, own2 = 0.0;

        auto add = [&](std::ptrdiff_t off, double d1, double d2) {
            const std::size_t c = r + off;
            if (!mask_->inside(c)) return;  // projected away
            diag_[c] += d1 * d1 + d2 * d2;
        };

        const std::ptrdiff_t sxyz[3] = {1, static_cast<std::ptrdiff_t>(grid_->resolution()[0]),
                                        static_cast<std::ptrdiff_t>(grid_->resolution()[0]) *
                                            grid_->resolution()[1]};
        // x axis feeds D1 only
        switch (pat(pk, 0)) {
            case kCentered:
                add(-sxyz[0], -cx[1], 0.0);
                add(+sxyz[0], +cx[1], 0.0);
                break;
            case kLeftOut: own1 += cx[0]; break;
            default: own1 -= cx[0]; break;
        }
        // y axis feeds D2 only
        switch (pat(pk, 1)) {
            case kCentered:
                add(-sxyz[1], 0.0, -cy[1]);
                add(+sxyz[1], 0.0, +cy[1]);
                break;
            case kLeftOut: own2 += cy[0]; break;
            default: own2 -= cy[0]; break;
        }
        // t axis feeds both: D1 via +2y, D2 via -2x
        const double a1 = 2.0 * p.y, a2 = -2.0 * p.x;
        switch (pat(pk, 2)) {
            case kCentered:
                add(-sxyz[2], -a1 * ct[1], -a2 * ct[1]);
                add(+sxyz[2], +a1 * ct[1], +a2 * ct[1]);
                break;
            case kLeftOut:
                own1 += a1 * ct[0];
                own2 += a2 * ct[0];
                break;
            default:
                own1 -= a1 * ct[0];
                own2 -= a2 * ct[0];
                break;
        }
        diag_[r] += own1 * own1 + own2 * own2;
    }
    // strictly positive on inside nodes (one-sided terms or centered neighbors)
    for (std::size_t i = 0; i < n; ++i)
        if (mask_->inside(i) && !(diag_[i] > 0.0))
            throw std::runtime_error("KohnOperator: singular diagonal entry (degenerate mask)");
}

void KohnOperator::gradient(const Field& u, HorizontalField& out) const {
    if (!u.grid->same_layout(*grid_))
        throw std::invalid_argument("KohnOperator::gradient: grid mismatch");
    const std::size_t n = grid_->node_count();
    out.grid = grid_;
    out.mask = mask_;
    out.z1.assign(n, 0.0);
    out.z2.assign(n, 0.0);

    const auto& res = grid_->resolution();
    const auto& h = grid_->spacing();
    const std::ptrdiff_t sx = 1;
    const std::ptrdiff_t sy = res[0];
    const std::ptrdiff_t st = static_cast<std::ptrdiff_t>(res[0]) * res[1];
    const double* v = u.values.data();

    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            if (!mask_->inside(i)) continue;
            const std::uint8_t pk = pattern_[i];
            const Point3 p = grid_->node(i);

            double dx;
            switch (pat(pk, 0)) {
                case kCentered: dx = (v[i + sx] - v[i - sx]) / (2.0 * h[0]); break;
                case kLeftOut: dx = v[i] / h[0]; break;
                default: dx = -v[i] / h[0]; break;
            }
            double dy;
            switch (pat(pk, 1)) {
                case kCentered: dy = (v[i + sy] - v[i - sy]) / (2.0 * h[1]); break;
                case kLeftOut: dy = v[i] / h[1]; break;
                default: dy = -v[i] / h[1]; break;
            }
            double dt;
            switch (pat(pk, 2)) {
                case kCentered: dt = (v[i + st] - v[i - st]) / (2.0 * h[2]); break;
                case kLeftOut: dt = v[i] / h[2]; break;
                default: dt = -v[i] / h[2]; break;
            }
            out.z1[i] = dx + 2.0 * p.y * dt;
            out.z2[i] = dy - 2.0 * p.x * dt;
        }
    });
}

HorizontalField KohnOperator::gradient(const Field& u) const {
    HorizontalField out;
    gradient(u, out);
    return out;
}

double KohnOperator::dirichlet_energy(const Field& u) const {
    HorizontalField g = gradient(u);
    const double* z1 = g.z1.data();
    const double* z2 = g.z2.data();
    return grid_->cell_volume() * parallel_sum(grid_->node_count(), [z1, z2](std::size_t i) {
               return z1[i] * z1[i] + z2[i] * z2[i];
           });
}

void KohnOperator::apply(const Field& u, Field& out) const {
    HorizontalField g = gradient(u);

    if (out.values.size() != grid_->node_count()) {
        out.grid = grid_;
        out.mask = mask_;
        out.values.assign(grid_->node_count(), 0.0);
    } else {
        out.grid = grid_;
        out.mask = mask_;
        std::fill(out.values.begin(), out.values.end(), 0.0);
    }

    const auto& res = grid_->resolution();
    const auto& h = grid_->spacing();
    const std::ptrdiff_t sx = 1;
    const std::ptrdiff_t sy = res[0];
    const std::ptrdiff_t st = static_cast<std::ptrdiff_t>(res[0]) * res[1];
    double* o = out.values.data();
    const std::size_t n = grid_->node_count();

    // scatter of D1^T z1 + D2^T z2 (serial: deterministic, race-free)
    for (std::size_t r = 0; r < n; ++r) {
        if (!mask_->inside(r)) continue;
        const std::uint8_t pk = pattern_[r];
        const Point3 p = grid_->node(r);
        const double w1 = g.z1[r];
        const double w2 = g.z2[r];

        switch (pat(pk, 0)) {
            case kCentered: {
                const double c = w1 / (2.0 * h[0]);
                o[r - sx] -= c;
                o[r + sx] += c;
                break;
            }
            case kLeftOut: o[r] += w1 / h[0]; break;
            default: o[r] -= w1 / h[0]; break;
        }
        switch (pat(pk, 1)) {
            case kCentered: {
                const double c = w2 / (2.0 * h[1]);
                o[r - sy] -= c;
                o[r + sy] += c;
                break;
            }
            case kLeftOut: o[r] += w2 / h[1]; break;
            default: o[r] -= w2 / h[1]; break;
        }
        const double wt = 2.0 * p.y * w1 - 2.0 * p.x * w2;
        switch (pat(pk, 2)) {
            case kCentered: {
                const double c = wt / (2.0 * h[2]);
                o[r - st] -= c;
                o[r + st] += c;
                break;
            }
            case kLeftOut: o[r] += wt / h[2]; break;
            default: o[r] -= wt / h[2]; break;
        }
    }
    // project to the masked subspace
    for (std::size_t i = 0; i < n; ++i)
        if (!mask_->inside(i)) o[i] = 0.0;
}

Field KohnOperator::apply(const Field& u) const {
    Field out(grid_, mask_);
    apply(u, out);
    return out;
}

PoissonResult KohnOperator::solve(const Field& f, double tol, int max_iter,
                                  const Field* initial_guess) const {
    if (!f.grid->same_layout(*grid_))
        throw std::invalid_argument("KohnOperator::solve: grid mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("KohnOperator::solve: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("KohnOperator::solve: max_iter must be >= 1");

    const std::size_t n = grid_->node_count();
    PoissonResult res;
    res.u = initial_guess ? *initial_guess : Field(grid_, mask_);
    if (initial_guess) {
        // solutions live on the masked subspace
        for (std::size_t i = 0; i < n; ++i)
            if (!mask_->inside(i)) res.u.values[i] = 0.0;
    }

    auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
        const double* pa = a.data();
        const double* pb = b.data();
        return parallel_sum(n, [pa, pb](std::size_t i) { return pa[i] * pb[i]; });
    };

    Field r(grid_, mask_), z(grid_, mask_), q(grid_, mask_), pdir(grid_, mask_);
    apply(res.u, q);
    for (std::size_t i = 0; i < n; ++i) r.values[i] = f.values[i] - q.values[i];
    for (std::size_t i = 0; i < n; ++i)
        if (!mask_->inside(i)) r.values[i] = 0.0;

    const double fnorm = std::sqrt(dot(f.values, f.values));
    if (fnorm == 0.0) {
        res.u = Field(grid_, mask_);
        res.converged = true;
        return res;
    }

    auto precondition = [&](const Field& in, Field& out) {
        for (std::size_t i = 0; i < n; ++i)
            out.values[i] = mask_->inside(i) ? in.values[i] / diag_[i] : 0.0;
    };

    precondition(r, z);
    pdir.values = z.values;
    double rz = dot(r.values, z.values);
    double rnorm = std::sqrt(dot(r.values, r.values));

    int it = 0;
    while (rnorm > tol * fnorm && it < max_iter) {
        apply(pdir, q);
        const double pq = dot(pdir.values, q.values);
        if (!(pq > 0.0)) break;  // loss of positivity: bail with best iterate
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) res.u.values[i] += alpha * pdir.values[i];
        for (std::size_t i = 0; i < n; ++i) r.values[i] -= alpha * q.values[i];
        precondition(r, z);
        const double rz_next = dot(r.values, z.values);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) pdir.values[i] = z.values[i] + beta * pdir.values[i];
        rnorm = std::sqrt(dot(r.values, r.values));
        ++it;
    }
    res.rel_residual = rnorm / fnorm;
    res.iterations = it;
    res.converged = rnorm <= tol * fnorm;
    return res;
}

// ---- convenience wrappers ----------------------------------------------------

HorizontalField horizontal_gradient(const Field& u) { return KohnOperator(u.mask).gradient(u); }

double dirichlet_energy(const Field& u) { return KohnOperator(u.mask).dirichlet_energy(u); }

Field apply_stiffness(const Field& u) { return KohnOperator(u.mask).apply(u); }

Field solve_poisson(const Field& f, double tol, int max_iter) {
    KohnOperator op(f.mask);
    PoissonResult r = op.solve(f, tol, max_iter);
    if (!r.converged)
        throw std::runtime_error("solve_poisson: CG did not converge within " +
                                 std::to_string(max_iter) +
                                 " iterations; achieved relative residual " +
                                 std::to_string(r.rel_residual));
    return r.u;
}

double default_cg_tol() { return 1e-8; }

int default_cg_max_iter(std::size_t unknowns) {
    const int by_size = static_cast<int>(10.0 * std::sqrt(static_cast<double>(unknowns)));
    return std::max(500, by_size);
}

}  // namespace heisenvar
