#include "heisenvar/subcrit.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "heisenvar/extremals.hpp"
#include "heisenvar/measures.hpp"
#include "heisenvar/parallel.hpp"
#include "heisenvar/report_io.hpp"

namespace heisenvar {

namespace {

Field initial_iterate(const SubcritConfig& cfg, const KohnOperator& op) {
    GridPtr grid = op.mask_ptr()->grid_ptr();
    MaskPtr mask = op.mask_ptr();

    if (std::holds_alternative<Field>(cfg.init)) {
        Field u = std::get<Field>(cfg.init);
        if (!u.grid->same_layout(*grid))
            throw std::invalid_argument("solve_subcritical: provided init on wrong grid");
        Field v(grid, mask);
        for (std::size_t i = 0; i < v.size(); ++i)
            v.values[i] = mask->inside(i) ? u.values[i] : 0.0;
        return v;
    }
    if (std::holds_alternative<RandomInit>(cfg.init)) {
        std::mt19937_64 rng(std::get<RandomInit>(cfg.init).seed);
        std::uniform_real_distribution<double> uni(0.1, 1.0);
        Field v(grid, mask);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (mask->inside(i)) v.values[i] = uni(rng);
        return v;
    }

    BubbleInit bi = std::get<BubbleInit>(cfg.init);
    Point3 c = bi.center;
    if (!bi.center_given) {
        // deepest interior node: maximize distance to the mask complement,
        // approximated by the largest Koranyi ball of inside nodes
        double sx = 0, sy = 0, st = 0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < grid->node_count(); ++i)
            if (mask->inside(i)) {
                const Point3 p = grid->node(i);
                sx += p.x;
                sy += p.y;
                st += p.t;
                ++cnt;
            }
        c = {sx / cnt, sy / cnt, st / cnt};
    }
    // snap to the nearest inside node
    double best = INFINITY;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < grid->node_count(); ++i) {
        if (!mask->inside(i)) continue;
        const Point3 p = grid->node(i);
        const double dx = p.x - c.x, dy = p.y - c.y, dt = p.t - c.t;
        const double d = dx * dx + dy * dy + dt * dt;
        if (d < best) {
            best = d;
            best_i = i;
        }
    }
    const Point3 center = grid->node(best_i);
    const double rho = 2.5 * bi.lambda;
    Field v = field_from_function(grid, mask, [&](const Point3& p) {
        return koranyi_cutoff(p, center, rho) *
               jerison_lee_value3(scaled_translate3(bi.lambda, center, p)) / bi.lambda;
    });
    return v;
}

}  // namespace

SolveReport solve_subcritical(const SubcritConfig& cfg, GridPtr grid, MaskPtr mask) {
    KohnOperator op(std::move(mask));
    (void)grid;
    return solve_subcritical(cfg, op);
}

SolveReport solve_subcritical(const SubcritConfig& cfg, const KohnOperator& op) {
    const GroupParams params(1);
    const double crit = params.crit_exp();
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < crit - 2.0))
        throw std::invalid_argument("solve_subcritical: epsilon outside (0, 2*-2)");
    const double p = crit - cfg.epsilon;

    GridPtr grid = op.mask_ptr()->grid_ptr();
    MaskPtr mask = op.mask_ptr();
    const std::size_t n = grid->node_count();
    const int cg_max =
        cfg.cg_max_iter > 0 ? cfg.cg_max_iter : default_cg_max_iter(mask->interior_count());

    Field u = initial_iterate(cfg, op);
    {
        const double e0 = op.dirichlet_energy(u);
        if (!(e0 > 0.0)) throw std::runtime_error("solve_subcritical: zero-energy initial iterate");
        u = scale(1.0 / std::sqrt(e0), u);
    }

    SolveReport rep;
    Field rhs(grid, mask), w(grid, mask);
    double s_prev = quadrature_lp(u, p);
    double rel_change = 1.0;
    bool converged = false;
    int m = 0;
    for (; m < cfg.fp_max_iter; ++m) {
        // rhs = |u|^{p-2} u
        for (std::size_t i = 0; i < n; ++i) {
            const double v = u.values[i];
            rhs.values[i] = v == 0.0 ? 0.0 : std::pow(std::abs(v), p - 2.0) * v;
        }
        const double inner_tol =
            std::min(cfg.cg_tol, std::max(1e-12, 0.02 * rel_change));
        PoissonResult pr = op.solve(rhs, inner_tol, cg_max, &w);
        if (!pr.converged && pr.rel_residual > 1e-4)
            throw std::runtime_error("solve_subcritical: CG failure, residual " +
                                     std::to_string(pr.rel_residual));
        w = pr.u;

        const double e = op.dirichlet_energy(w);
        if (!(e > 0.0)) throw std::runtime_error("solve_subcritical: degenerate iterate");
        Field u_next = scale(1.0 / std::sqrt(e), w);

        Field diff = axpy(-1.0, u, u_next);
        rel_change = std::sqrt(quadrature_lp(diff, 2.0) / std::max(quadrature_lp(u, 2.0), 1e-300));
        u = std::move(u_next);

        const double s = quadrature_lp(u, p);
        if (s < s_prev) rep.ascent_violation = std::max(rep.ascent_violation, s_prev - s);
        s_prev = s;

        if (rel_change <= cfg.fp_tol) {
            converged = true;
            ++m;
            break;
        }
    }

    rep.maximizer = u;
    rep.iterations = m;
    rep.converged = converged;
    rep.s_eps = s_prev;
    rep.multiplier = 1.0 / s_prev;

    // Euler-Lagrange self-consistency: ||Lu - mult |u|^{p-2}u|| / ||Lu||
    Field lu = op.apply(u);
    Field elr(grid, mask);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = u.values[i];
        const double g = v == 0.0 ? 0.0 : std::pow(std::abs(v), p - 2.0) * v;
        elr.values[i] = lu.values[i] - rep.multiplier * g;
    }
    const double num = std::sqrt(quadrature_lp(elr, 2.0));
    const double den = std::sqrt(quadrature_lp(lu, 2.0));
    rep.el_residual = den > 0.0 ? num / den : INFINITY;
    return rep;
}

SweepResult epsilon_sweep(const std::vector<double>& eps_list, GridPtr grid, MaskPtr mask,
                          bool warm_start, const SubcritConfig& base) {
    if (eps_list.empty()) throw std::invalid_argument("epsilon_sweep: empty eps list");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("epsilon_sweep: eps list must be strictly descending");

    KohnOperator op(mask);
    SweepResult out;
    const double diam = mask_diameter(*mask);
    out.rho1 = diam / 8.0;
    out.rho2 = diam / 4.0;

    Field prev;
    bool have_prev = false;
    for (double eps : eps_list) {
        SubcritConfig cfg = base;
        cfg.epsilon = eps;
        if (warm_start && have_prev) cfg.init = prev;
        SweepRow row;
        row.epsilon = eps;
        try {
            SolveReport rep = solve_subcritical(cfg, op);
            row.s_eps = rep.s_eps;
            row.el_residual = rep.el_residual;
            row.multiplier = rep.multiplier;
            row.iterations = rep.iterations;
            row.converged = rep.converged;
            ConcReport conc = concentration_report(rep.maximizer, {out.rho1, out.rho2});
            row.peak = conc.peak;
            row.conc_fraction_rho1 = conc.fractions[0];
            row.conc_fraction_rho2 = conc.fractions[1];
            prev = rep.maximizer;
            have_prev = true;
            out.maximizers.push_back(rep.maximizer);
        } catch (const std::exception&) {
            row.converged = false;  // flagged row; sweep continues
            out.maximizers.emplace_back();
        }
        out.rows.push_back(row);
    }
    (void)grid;
    return out;
}

std::string sweep_csv(const SweepResult& sweep, const std::string& provenance_line) {
    std::ostringstream os;
    if (!provenance_line.empty()) os << "# " << provenance_line << "\n";
    os << "epsilon,s_eps,el_residual,multiplier,iterations,converged,peak_x,peak_y,peak_t,"
          "conc_fraction_rho1,conc_fraction_rho2\n";
    for (const auto& r : sweep.rows) {
        os << fmt17(r.epsilon) << ',' << fmt17(r.s_eps) << ',' << fmt17(r.el_residual) << ','
           << fmt17(r.multiplier) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
           << fmt17(r.peak.x) << ',' << fmt17(r.peak.y) << ',' << fmt17(r.peak.t) << ','
           << fmt17(r.conc_fraction_rho1) << ',' << fmt17(r.conc_fraction_rho2) << "\n";
    }
    return os.str();
}

double eigen_oracle(GridPtr grid, MaskPtr mask, double rel_tol, int max_iter) {
    KohnOperator op(mask);
    const std::size_t n = grid->node_count();

    Field v(grid, mask);
    for (std::size_t i = 0; i < n; ++i)
        if (mask->inside(i)) v.values[i] = 1.0;
    v = scale(1.0 / std::sqrt(quadrature_lp(v, 2.0)), v);

    double lambda = 0.0, lambda_prev = INFINITY;
    Field w(grid, mask);
    for (int it = 0; it < max_iter; ++it) {
        PoissonResult pr = op.solve(v, 1e-11, 100000, &w);
        if (!pr.converged)
            throw std::runtime_error("eigen_oracle: inner CG did not converge");
        w = pr.u;
        // Rayleigh quotient via L w ~ v
        const double num = pairing(v, w);
        const double den = quadrature_lp(w, 2.0);
        lambda = num / den;
        v = scale(1.0 / std::sqrt(den), w);
        if (std::abs(lambda - lambda_prev) <= rel_tol * std::abs(lambda)) return lambda;
        lambda_prev = lambda;
    }
    throw std::runtime_error("eigen_oracle: power iteration did not converge");
}

}  // namespace heisenvar
