#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heisenvar/extremals.hpp"
#include "heisenvar/grid.hpp"

namespace heisenvar {

struct Atom {
    double weight = 0.0;
    Point3 location{};
};

// Discrete Radon measure: absolutely continuous density sampled on the grid,
// a finite atom list, and a scalar stand-in for the non-atomic singular part.
struct EnergyMeasure {
    Field density;
    std::vector<Atom> atoms;
    double residual_mass = 0.0;

    double density_mass() const;
    double atom_mass() const;
    double total_mass() const { return density_mass() + atom_mass() + residual_mass; }
};

// (u, mu) with mu >= |D_H u|^2 dxi and mu(closure) <= 1.
struct XPair {
    Field u;
    EnergyMeasure mu;
};

// nodewise density domination + mass bound, with the spec slack of 1e-10
void validate_xpair(const XPair& p, double slack = 1e-10);

struct ConcReport {
    Point3 peak{};
    bool peak_boundary = false;  // within 2h of the mask edge
    std::vector<double> radii;
    std::vector<double> fractions;
    std::vector<double> weak_pairings;
};

EnergyMeasure energy_density(const Field& u);
// density |u|^{2*} of a field (n = 1: fourth power)
EnergyMeasure lp_density(const Field& u, double p);

// Greedy ball clustering: repeatedly move the heaviest Koranyi ball of radius
// rho into an atom at the ball's density barycenter while its mass >= theta.
EnergyMeasure detect_atoms(const EnergyMeasure& m, double ball_radius, double mass_threshold,
                           int max_atoms = 64);

double F_eps(const Field& u, double eps);
double gamma_limit_F(const XPair& p, double s_star);

struct BoundCheck {
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - value
    bool ok = false;
};
// gamma_limit_F(p) <= s_star * mass^{2*/2} * (1 + tol); throws on invalid pair
BoundCheck sstar_bound_check(const XPair& p, double s_star, double tol = 0.02);

struct CcaPairVerdict {
    double mu_weight = 0.0;
    double nu_weight = 0.0;
    Point3 location{};
    double ratio = 0.0;  // nu / (s_star * mu^2)
    bool ok = false;
    bool paired = true;
};

struct CcaReport {
    std::vector<CcaPairVerdict> pairs;
    int unpaired = 0;
    bool all_ok = false;
};

CcaReport cca_check(const std::vector<Field>& sequence, double ball_radius, double theta,
                    double s_star, double slack = 0.05);

// Fixed deterministic bank of 16 nonnegative test functions on the grid box:
// 8 localized polynomial bumps and 8 shifted tensor cosines.
int test_bank_size();
double test_bank_value(const Grid& grid, int index, const Point3& p);
Field test_bank_field(GridPtr grid, MaskPtr mask, int index);

std::vector<double> weak_star_pairings(const EnergyMeasure& m);
// plain L^2 pairings <u, phi_i> of a field against the bank
std::vector<double> field_pairings(const Field& u);

ConcReport concentration_report(const Field& u, const std::vector<double>& radii);

// Koranyi-ball mass scan used by detect_atoms and concentration_report.
double ball_density_mass(const Field& density, const Point3& center, double radius);

// approximate Koranyi circumdiameter of the mask (2 * max gauge distance from
// the density barycenter of the interior nodes)
double mask_diameter(const DomainMask& mask);

}  // namespace heisenvar
