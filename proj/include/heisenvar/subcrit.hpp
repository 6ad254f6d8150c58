#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "heisenvar/grid.hpp"
#include "heisenvar/hdiff.hpp"

namespace heisenvar {

struct BubbleInit {
    double lambda = 0.3;
    Point3 center{};
    bool center_given = false;  // default: densest interior spot
};
struct RandomInit {
    std::uint64_t seed = 1;
};

struct SubcritConfig {
    double epsilon = 0.5;  // in (0, 2*-2)
    double fp_tol = 1e-7;
    int fp_max_iter = 2000;
    double cg_tol = 1e-8;
    int cg_max_iter = 0;  // 0 = default rule
    std::variant<BubbleInit, RandomInit, Field> init = BubbleInit{};
};

struct SolveReport {
    double s_eps = 0.0;        // quadrature_lp(maximizer, 2*-eps)
    Field maximizer;           // unit Dirichlet energy
    double multiplier = 0.0;   // Lagrange multiplier of the EL equation
    double el_residual = 0.0;  // ||Lu - mult*|u|^{p-2}u|| / ||Lu||
    int iterations = 0;
    bool converged = false;
    double ascent_violation = 0.0;  // largest observed decrease of the p-mass
};

// Normalized inverse iteration u <- normalize(L^{-1}(|u|^{p-2} u)), p = 2*-eps.
SolveReport solve_subcritical(const SubcritConfig& cfg, GridPtr grid, MaskPtr mask);
SolveReport solve_subcritical(const SubcritConfig& cfg, const KohnOperator& op);

struct SweepRow {
    double epsilon = 0.0;
    double s_eps = 0.0;
    double el_residual = 0.0;
    double multiplier = 0.0;
    int iterations = 0;
    bool converged = false;
    Point3 peak{};
    double conc_fraction_rho1 = 0.0;
    double conc_fraction_rho2 = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<Field> maximizers;
    double rho1 = 0.0;  // diam/8
    double rho2 = 0.0;  // diam/4
};

// Descending eps list; each solve warm-starts from the previous maximizer
// when warm_start is set.  Per-row failures are flagged, the sweep continues.
SweepResult epsilon_sweep(const std::vector<double>& eps_list, GridPtr grid, MaskPtr mask,
                          bool warm_start, const SubcritConfig& base = SubcritConfig());

std::string sweep_csv(const SweepResult& sweep, const std::string& provenance_line);

// Smallest eigenvalue of L by inverse power iteration (1e-8 relative).
double eigen_oracle(GridPtr grid, MaskPtr mask, double rel_tol = 1e-8, int max_iter = 500);

}  // namespace heisenvar
