#include "heisenvar/extremals.hpp"

#include <cmath>
#include <stdexcept>

#include "heisenvar/hdiff.hpp"
#include "heisenvar/parallel.hpp"

namespace heisenvar {

double jerison_lee_value(const GroupPoint& xi, const GroupParams& params) {
    double z2 = 0.0;
    for (std::size_t j = 0; j < xi.n(); ++j) z2 += xi.x[j] * xi.x[j] + xi.y[j] * xi.y[j];
    const double a = 1.0 + z2;
    const double base = a * a + xi.t * xi.t;
    const double expo = -(params.q() - 2.0) / 4.0;
    return std::pow(base, expo);
}

double jerison_lee_value3(const Point3& xi) {
    const double a = 1.0 + xi.x * xi.x + xi.y * xi.y;
    return 1.0 / std::sqrt(a * a + xi.t * xi.t);
}

Field bubble_field(const BubbleSpec& spec, GridPtr grid, MaskPtr mask) {
    if (!(spec.lambda > 0.0)) throw std::invalid_argument("bubble_field: lambda must be positive");
    const double pref = spec.amplitude / spec.lambda;  // lambda^{-(Q-2)/2}, Q = 4
    const double lam = spec.lambda;
    const Point3 c = spec.center;
    return field_from_function(std::move(grid), std::move(mask), [pref, lam, c](const Point3& p) {
        return pref * jerison_lee_value3(scaled_translate3(lam, c, p));
    });
}

Field normalized_bubble(const BubbleSpec& spec, GridPtr grid, MaskPtr mask) {
    Field u = bubble_field(spec, std::move(grid), std::move(mask));
    const double e = dirichlet_energy(u);
    if (!(e > 0.0))
        throw std::runtime_error("normalized_bubble: zero discrete energy (bubble outside mask)");
    return scale(1.0 / std::sqrt(e), u);
}

double cutoff_profile(double s) {
    const double a = s - 1.0;
    if (a <= 0.0) return 1.0;
    if (a >= 1.0) return 0.0;
    const double b = 1.0 - a * a;
    return b * b * b;
}

double koranyi_cutoff(const Point3& xi, const Point3& center, double rho) {
    return cutoff_profile(gauge3(scaled_translate3(rho, center, xi)));
}

// ---- closed-form reference integrals ----------------------------------------

namespace jl {

double u4_rt(double r, double t) {
    const double a = 1.0 + r * r;
    const double g = a * a + t * t;
    return 1.0 / (g * g);
}

double energy_density_rt(double r, double t) {
    const double a = 1.0 + r * r;
    const double g = a * a + t * t;
    return 4.0 * r * r / (g * g);
}

namespace {

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 28);
}

// integral over t in [0, T] (T may be infinite via mapped coordinates)
double t_integral(const std::function<double(double, double)>& f, double r, double T,
                  double tol) {
    if (std::isinf(T)) {
        // t = w/(1-w)
        return adaptive_simpson(
            [&](double w) {
                const double om = 1.0 - w;
                if (om <= 0.0) return 0.0;
                const double t = w / om;
                return f(r, t) / (om * om);
            },
            0.0, 1.0, tol);
    }
    return adaptive_simpson([&](double t) { return f(r, t); }, 0.0, T, tol);
}

// circumference of the circle of radius r inside the square [-X,X]^2
double arc_in_square(double r, double X) {
    if (r <= X) return 2.0 * M_PI * r;
    const double lim = X * std::sqrt(2.0);
    if (r >= lim) return 0.0;
    return 2.0 * M_PI * r - 8.0 * r * std::acos(X / r);
}

constexpr double kTol = 1e-12;

}  // namespace

double total(const std::function<double(double, double)>& f_rt) {
    // r = s/(1-s); both t half-axes
    const double val = adaptive_simpson(
        [&](double s) {
            const double om = 1.0 - s;
            if (om <= 0.0) return 0.0;
            const double r = s / om;
            const double inner = t_integral(f_rt, r, INFINITY, kTol);
            return 2.0 * M_PI * r * inner / (om * om);
        },
        0.0, 1.0, kTol);
    return 2.0 * val;
}

double box_integral(const std::function<double(double, double)>& f_rt, double X, double T) {
    auto radial = [&](double r) { return arc_in_square(r, X) * t_integral(f_rt, r, T, kTol); };
    const double inner_part = adaptive_simpson(radial, 0.0, X, kTol);
    const double corner_part = adaptive_simpson(radial, X, X * std::sqrt(2.0), kTol);
    return 2.0 * (inner_part + corner_part);
}

double ball_integral(const std::function<double(double, double)>& f_rt, double R) {
    auto radial = [&](double r) {
        const double r4 = r * r * r * r;
        const double lim2 = R * R * R * R - r4;
        if (lim2 <= 0.0) return 0.0;
        return 2.0 * M_PI * r * t_integral(f_rt, r, std::sqrt(lim2), kTol);
    };
    return 2.0 * adaptive_simpson(radial, 0.0, R, kTol);
}

double total_u4() {
    static const double v = total(u4_rt);
    return v;
}

double total_energy() {
    static const double v = total(energy_density_rt);
    return v;
}

double energy_fraction_outside_ball(double lambda, double R) {
    // scaling: fraction for scale lambda at radius R equals fraction for the
    // canonical bubble at radius R/lambda
    const double tot = total_energy();
    return 1.0 - ball_integral(energy_density_rt, R / lambda) / tot;
}

double mass_fraction_outside_ball(double lambda, double R) {
    const double tot = total_u4();
    return 1.0 - ball_integral(u4_rt, R / lambda) / tot;
}

}  // namespace jl

// ---- interpolant-based quadrature for S* -------------------------------------

namespace {

// 3-point Gauss on [0,1]
constexpr double kGx[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

struct BoxQuadResult {
    double mass_u4 = 0.0;
    double energy = 0.0;
};

// Integrates |Pi u|^4 and |D_H Pi u|^2 over the box, Pi = trilinear interpolant
// of the bubble samples.  The Gauss rule is exact for both integrands, so the
// only error versus the continuum is the O(h^2) interpolation bias.
BoxQuadResult interpolant_box_quadrature(const SstarConfig& cfg, int nres) {
    const double X = cfg.box_half_xy, T = cfg.box_half_t;
    const int N = nres;
    const double hx = 2.0 * X / (N - 1);
    const double hy = hx;
    const double ht = 2.0 * T / (N - 1);
    const double x0 = cfg.center.x - X, y0 = cfg.center.y - X, t0 = cfg.center.t - T;

    std::vector<double> samples(static_cast<std::size_t>(N) * N * N);
    const double pref = 1.0 / cfg.lambda;
    parallel_for(samples.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const int ix = static_cast<int>(i % N);
            const int iy = static_cast<int>((i / N) % N);
            const int it = static_cast<int>(i / (static_cast<std::size_t>(N) * N));
            const Point3 p{x0 + hx * ix, y0 + hy * iy, t0 + ht * it};
            samples[i] = pref * jerison_lee_value3(scaled_translate3(cfg.lambda, cfg.center, p));
        }
    });

    const std::size_t ncells = static_cast<std::size_t>(N - 1) * (N - 1) * (N - 1);
    auto cell_value = [&](std::size_t ci, bool energy_part) {
        const int cx = static_cast<int>(ci % (N - 1));
        const int cy = static_cast<int>((ci / (N - 1)) % (N - 1));
        const int ct = static_cast<int>(ci / (static_cast<std::size_t>(N - 1) * (N - 1)));
        const std::size_t base = static_cast<std::size_t>(cx) +
                                 static_cast<std::size_t>(N) * (cy + static_cast<std::size_t>(N) * ct);
        const std::size_t sN = N, sNN = static_cast<std::size_t>(N) * N;
        const double c000 = samples[base];
        const double c100 = samples[base + 1];
        const double c010 = samples[base + sN];
        const double c110 = samples[base + sN + 1];
        const double c001 = samples[base + sNN];
        const double c101 = samples[base + sNN + 1];
        const double c011 = samples[base + sNN + sN];
        const double c111 = samples[base + sNN + sN + 1];
        const double px = x0 + hx * cx, py = y0 + hy * cy, pt = t0 + ht * ct;

        double acc = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double z = kGx[a];
            for (int b2 = 0; b2 < 3; ++b2) {
                const double e2 = kGx[b2];
                for (int c2 = 0; c2 < 3; ++c2) {
                    const double th = kGx[c2];
                    const double w = kGw[a] * kGw[b2] * kGw[c2];
                    // trilinear value and local-coordinate partials
                    const double u00 = c000 + z * (c100 - c000);
                    const double u10 = c010 + z * (c110 - c010);
                    const double u01 = c001 + z * (c101 - c001);
                    const double u11 = c011 + z * (c111 - c011);
                    const double u0 = u00 + e2 * (u10 - u00);
                    const double u1 = u01 + e2 * (u11 - u01);
                    const double u = u0 + th * (u1 - u0);
                    if (!energy_part) {
                        const double q = u * u;
                        acc += w * q * q;
                        continue;
                    }
                    const double dzeta0 = (c100 - c000) + e2 * ((c110 - c010) - (c100 - c000));
                    const double dzeta1 = (c101 - c001) + e2 * ((c111 - c011) - (c101 - c001));
                    const double du_dx = (dzeta0 + th * (dzeta1 - dzeta0)) / hx;
                    const double deta0 = (u10 - u00);
                    const double deta1 = (u11 - u01);
                    const double du_dy = (deta0 + th * (deta1 - deta0)) / hy;
                    const double du_dt = (u1 - u0) / ht;
                    const double gx = px + hx * z;
                    const double gy = py + hy * e2;
                    const double z1 = du_dx + 2.0 * gy * du_dt;
                    const double z2 = du_dy - 2.0 * gx * du_dt;
                    acc += w * (z1 * z1 + z2 * z2);
                }
            }
        }
        return acc * hx * hy * ht;
    };

    BoxQuadResult out;
    out.mass_u4 = parallel_sum(ncells, [&](std::size_t ci) { return cell_value(ci, false); });
    out.energy = parallel_sum(ncells, [&](std::size_t ci) { return cell_value(ci, true); });
    return out;
}

}  // namespace

SstarEstimate estimate_Sstar(const SstarConfig& cfg) {
    if (cfg.resolutions.size() < 2)
        throw std::invalid_argument("estimate_Sstar: need at least 2 resolutions");
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("estimate_Sstar: lambda must be positive");

    // exact closed-form complement of the (pulled back) box
    const double Xc = cfg.box_half_xy / cfg.lambda;
    const double Tc = cfg.box_half_t / (cfg.lambda * cfg.lambda);
    const double tail_u4 = jl::total_u4() - jl::box_integral(jl::u4_rt, Xc, Tc);
    const double tail_energy = jl::total_energy() - jl::box_integral(jl::energy_density_rt, Xc, Tc);

    SstarEstimate est;
    est.resolutions = cfg.resolutions;
    for (int nres : cfg.resolutions) {
        if (nres < 5) throw std::invalid_argument("estimate_Sstar: resolution too small");
        const BoxQuadResult q = interpolant_box_quadrature(cfg, nres);
        const double B = q.mass_u4 + tail_u4;
        const double A = q.energy + tail_energy;
        est.per_resolution.push_back(B / (A * A));
    }
    for (std::size_t i = 1; i < est.per_resolution.size(); ++i)
        est.spreads.push_back(std::abs(est.per_resolution[i] - est.per_resolution[i - 1]));
    for (std::size_t i = 1; i < est.spreads.size(); ++i)
        est.shrink_factors.push_back(est.spreads[i - 1] / std::max(est.spreads[i], 1e-300));

    const double s_last = est.per_resolution.back();
    const double s_prev = est.per_resolution[est.per_resolution.size() - 2];
    // h halves between ladder entries; O(h^2) Richardson step
    est.value = s_last + (s_last - s_prev) / 3.0;
    est.error_bar = std::abs(s_last - s_prev);
    est.converged = est.error_bar <= 0.10 * std::abs(est.value);
    return est;
}

}  // namespace heisenvar
