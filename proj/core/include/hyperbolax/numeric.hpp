#pragma once

#include <functional>

#include "hyperbolax/common.hpp"

namespace hyperbolax {

// Global numeric policy. Every tolerance used by the library lives here so a
// report can state exactly which contract a number was checked against.
struct NumericPolicy {
  double tau_consistency_rel = 1e-12;   // tau vs bracket(xi) on construction
  double minkowski_identity_abs = 1e-10;  // tau^2 - |xi|^2 - 1
  double jacobian_fd_rel = 1e-5;        // analytic vs finite-difference det
  double volume_quad_rel = 1e-9;        // region volume quadrature target
  double isometry_rel = 1e-6;           // boost L2 isometry, adaptive quad
  double pythagoras_rel = 1e-10;        // angular pieces recombine
  double telescope_rel = 1e-12;         // dyadic pieces resum
  double linearity_rel = 1e-12;         // extension linearity
  double propagator_rel = 1e-8;         // Klein-Gordon / FT identity
  double adjoint_rel = 1e-8;            // <Tf,F> vs <f,T*F>
  double whitney_identity_rel = 1e-6;   // bilinear reconstruction
  double gradient_fd_rel = 1e-4;        // ascent direction vs finite diff
  double ascent_stop_rel = 1e-6;        // relative quotient change stop rule
  double rayleigh_boost_rel = 0.02;     // boost invariance at default grid
  double restart_spread_rel = 0.01;     // seeded restarts agree
  double ratio_stability_rel = 0.10;    // report ratios under grid doubling
  double tail_unreliable_frac = 0.10;   // tail estimate vs truncated norm
};

const NumericPolicy& policy();

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_legendre(int n);

// Adaptive 1d quadrature by panel bisection with embedded GL error estimate.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, int max_depth = 48);
cplx integrate_adaptive_c(const std::function<cplx(double)>& f, double a,
                          double b, double rel_tol, int max_depth = 48);

// Adaptive tensor quadrature over a box in up to 3 dimensions.
double integrate_box_adaptive(const std::function<double(const Vec&)>& f,
                              const Vec& lo, const Vec& hi, double rel_tol);

// Integral over the unit sphere S^{d-1}, d in {2,3}; refined until the result
// changes by less than rel_tol.
double integrate_sphere(int d, const std::function<double(const Vec&)>& f,
                        double rel_tol);

// Integral of f over R^d (d in {2,3}) in polar form, radial cutoff chosen by
// doubling until the outermost shell contributes less than rel_tol of total.
double integrate_radial_sphere(int d, const std::function<double(const Vec&)>& f,
                               double r_hint, double rel_tol);

double det_matrix(std::vector<Vec> m);  // small dense determinant, partial pivot

}  // namespace hyperbolax
