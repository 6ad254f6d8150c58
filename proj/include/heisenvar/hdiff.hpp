#pragma once

#include <memory>
#include <string>
#include <vector>

#include "heisenvar/grid.hpp"

namespace heisenvar {

// Components of D_H u along Z1, Z2 (n = 1), zero outside the mask.
struct HorizontalField {
    GridPtr grid;
    MaskPtr mask;
    std::vector<double> z1, z2;
};

struct PoissonResult {
    Field u;
    double rel_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Divergence-form discrete operator L = D1^T D1 + D2^T D2 ~ -Delta_H on the
// masked degrees of freedom.  Centered differences in the interior, one-sided
// two-point differences against the adjacent outside zero at mask boundaries,
// so the zero trace of S^1_0 is part of the energy.
class KohnOperator {
  public:
    explicit KohnOperator(MaskPtr mask);

    const DomainMask& mask() const { return *mask_; }
    MaskPtr mask_ptr() const { return mask_; }

    void gradient(const Field& u, HorizontalField& out) const;
    HorizontalField gradient(const Field& u) const;
    double dirichlet_energy(const Field& u) const;

    // out = L u (projected to inside nodes).
    void apply(const Field& u, Field& out) const;
    Field apply(const Field& u) const;

    // Jacobi-preconditioned CG for L u = f; stops at ||Lu-f|| <= tol*||f||.
    PoissonResult solve(const Field& f, double tol, int max_iter,
                        const Field* initial_guess = nullptr) const;

    const std::vector<double>& diagonal() const { return diag_; }

  private:
    MaskPtr mask_;
    GridPtr grid_;
    // per-node, per-axis difference pattern (2 bits each)
    std::vector<std::uint8_t> pattern_;
    std::vector<double> diag_;
};

// Convenience wrappers matching the module operation names.
HorizontalField horizontal_gradient(const Field& u);
double dirichlet_energy(const Field& u);
Field apply_stiffness(const Field& u);
// Throws on non-convergence (message carries the achieved residual).
Field solve_poisson(const Field& f, double tol, int max_iter);

double default_cg_tol();
int default_cg_max_iter(std::size_t unknowns);

}  // namespace heisenvar
