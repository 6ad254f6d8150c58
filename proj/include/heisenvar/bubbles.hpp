#pragma once

#include <optional>
#include <vector>

#include "heisenvar/extremals.hpp"
#include "heisenvar/grid.hpp"
#include "heisenvar/measures.hpp"

namespace heisenvar {

struct RecoveryTarget {
    double weight = 0.5;  // mu_j in (0,1]
    Point3 center{};
};

struct RecoverySpec {
    std::vector<RecoveryTarget> targets;
    std::optional<Field> background;
    double cutoff_rho = 0.2;
    std::vector<double> eps_ladder{0.2, 0.1, 0.05};
    double residual_mass = 0.0;  // scalar stand-in for the singular part
};

void validate_recovery_spec(const RecoverySpec& spec, const Grid& grid);

// Lemma 3.4 sequence member: normalized cutoff bubble phi * w_eps at xi_j,
// unit discrete Dirichlet energy.  Centers outside the mask are nudged to the
// nearest interior node.
Field recovery_single(const Point3& xi_j, double eps, double cutoff_rho, GridPtr grid,
                      MaskPtr mask);

// Lemma 3.5 glued sequence sum_j sqrt(mu_j) u_eps^(j); errors out when the
// discrete supports (with a stencil halo) overlap.
Field recovery_glued(const RecoverySpec& spec, double eps, GridPtr grid, MaskPtr mask);

// Prop 3.3 recovery pair (u*phi_rho + glued, residual + |D_H(...)|^2 dxi).
XPair recovery_pair(const RecoverySpec& spec, double eps, GridPtr grid, MaskPtr mask);

// X_N density step: (a_N u, a_N^2 * (mu truncated to N atoms)).
XPair xn_approximation(const XPair& p, int n_atoms, double a_n);

double energy_E_lambda(const Field& u, double lambda_param);
double energy_E_star(const Field& u);

struct ResidualReport {
    double dual_sup = 0.0;   // sup over the unit-energy test bank
    double l2_scaled = 0.0;  // quadrature L2 norm of the nodal residual
    double combined() const { return dual_sup + l2_scaled; }
};
ResidualReport dE_residual(const Field& u, double lambda_param);

struct PSBubble {
    double lambda0 = 0.2;
    double rate = 2.0;  // lambda_k = lambda0 * rate^-k
    Point3 center{};
    double amplitude = 2.0;  // exact-solution normalization for n = 1
    double cutoff_rho = 0.35;
};

struct PSSpec {
    std::optional<Field> base_solution;
    std::vector<PSBubble> bubbles;
    double lambda_param = 0.0;
    int k_begin = 0;
    int k_end = 6;  // inclusive
    double noise_amp = 0.0;
    std::uint64_t noise_seed = 0;
};

void validate_ps_spec(const PSSpec& spec);

// u_k = u^(0) + sum_j cutoff-localized bubble(lambda_k^(j), xi^(j)); checks
// that every bubble support stays inside the mask at every k.
std::vector<Field> synth_ps_sequence(const PSSpec& spec, GridPtr grid, MaskPtr mask);

double ps_lambda_at(const PSBubble& b, int k);

}  // namespace heisenvar
