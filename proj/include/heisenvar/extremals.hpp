#pragma once

#include <array>
#include <functional>
#include <vector>

#include "heisenvar/grid.hpp"

namespace heisenvar {

// Canonical extremal shape with c0 = 1:
//   U(xi) = ((1 + |z|^2)^2 + t^2)^(-(Q-2)/4),   n = 1  =>  exponent -1/2.
// Physical normalizations are applied numerically, never baked in.
double jerison_lee_value(const GroupPoint& xi, const GroupParams& params);
double jerison_lee_value3(const Point3& xi);

struct BubbleSpec {
    double lambda = 1.0;
    Point3 center{};
    double amplitude = 1.0;
};

// amplitude * lambda^{-(Q-2)/2} * U(delta_{1/lambda}(xi0^{-1} o xi)) sampled on
// the mask (zero outside).  The prefactor makes the family Dirichlet-energy
// invariant in the continuum.
Field bubble_field(const BubbleSpec& spec, GridPtr grid, MaskPtr mask);

// bubble rescaled to unit discrete Dirichlet energy on this grid.
Field normalized_bubble(const BubbleSpec& spec, GridPtr grid, MaskPtr mask);

// Smooth polynomial bump: 1 on [0,1] gauge-scaled ball, 0 beyond 2, C^2 glue
// via (1-s^2)^3 in between.  phi(xi) = bump(gauge(delta_{1/rho}(c^{-1} o xi))).
double cutoff_profile(double scaled_gauge);
double koranyi_cutoff(const Point3& xi, const Point3& center, double rho);

// ---- closed-form reference integrals (n = 1, c0 = 1) -------------------------
// Axisymmetric reductions of |U|^4 and |D_H U|^2; the numeric values are always
// computed by quadrature at runtime, never hard-coded.
namespace jl {

double u4_rt(double r, double t);              // |U|^4
double energy_density_rt(double r, double t);  // |D_H U|^2 = 4 r^2 ((1+r^2)^2+t^2)^-2

// integral over all of H^1
double total(const std::function<double(double, double)>& f_rt);
// integral over the centered box [-X,X]^2 x [-T,T]
double box_integral(const std::function<double(double, double)>& f_rt, double X, double T);
// integral over the Koranyi ball {gauge < R}
double ball_integral(const std::function<double(double, double)>& f_rt, double R);

double total_u4();
double total_energy();
// energy fraction of a lambda-bubble outside the Koranyi ball of radius R
double energy_fraction_outside_ball(double lambda, double R);
double mass_fraction_outside_ball(double lambda, double R);  // of |U|^4

}  // namespace jl

// ---- quadrature estimate of the best constant --------------------------------

struct SstarConfig {
    std::vector<int> resolutions{33, 65, 129};
    double box_half_xy = 3.0;
    double box_half_t = 3.0;
    double lambda = 1.0;
    Point3 center{};
};

struct SstarEstimate {
    double value = 0.0;      // Richardson-extrapolated
    double error_bar = 0.0;  // spread between the two finest resolutions
    std::vector<int> resolutions;
    std::vector<double> per_resolution;
    std::vector<double> spreads;        // successive |S_i - S_{i-1}|
    std::vector<double> shrink_factors; // spreads[i-1] / spreads[i]
    bool converged = false;             // error bar within 10 % of the value
};

// Integrates the trilinear interpolant of the sampled lambda-bubble over the
// box (cell-wise Gauss rule, genuine O(h^2) consistency) and adds the exact
// closed-form integral over the box complement.
SstarEstimate estimate_Sstar(const SstarConfig& cfg = SstarConfig());

}  // namespace heisenvar
