#pragma once

#include <cmath>

#include "hyperbolax/common.hpp"
#include "hyperbolax/numeric.hpp"

// Points on and around the upper hyperboloid tau = <xi> = sqrt(1 + |xi|^2),
// and the Lorentz boosts that act on it. Everything here is an immutable
// value type; operations are pure.

namespace hyperbolax {

inline double bracket(const Vec& xi) { return std::sqrt(1.0 + norm2sq(xi)); }

struct FrequencyPoint {
  Vec xi;
  int dim() const { return static_cast<int>(xi.size()); }
};

struct SpacetimePoint {
  Vec x;
  double t = 0.0;
  int dim() const { return static_cast<int>(x.size()); }
};

// A frequency point paired with its time coordinate on the hyperboloid.
// Construction validates the defining relation instead of trusting tau.
struct HyperboloidPoint {
  Vec xi;
  double tau;

  HyperboloidPoint(Vec xi_, double tau_) : xi(std::move(xi_)), tau(tau_) {
    const double want = bracket(xi);
    if (std::abs(tau - want) > policy().tau_consistency_rel * want)
      throw ValidationError("HyperboloidPoint: tau does not equal bracket(xi)");
    if (std::abs(tau * tau - norm2sq(xi) - 1.0) > policy().minkowski_identity_abs)
      throw ValidationError("HyperboloidPoint: tau^2 - |xi|^2 != 1");
  }

  static HyperboloidPoint lift(Vec xi_) {
    double t = bracket(xi_);
    return HyperboloidPoint(std::move(xi_), t);
  }
};

// Boost with velocity parameter nu. Splitting xi into components parallel and
// perpendicular to nu uses projection onto nu/|nu|; for nu = 0 the parallel
// part is taken to be zero and the boost is the identity.
struct LorentzBoost {
  Vec nu;
  double bracket_nu;

  explicit LorentzBoost(Vec nu_) : nu(std::move(nu_)), bracket_nu(bracket(nu)) {}
  int dim() const { return static_cast<int>(nu.size()); }
  LorentzBoost inverse() const { return LorentzBoost(-nu); }
};

namespace detail {
inline void split_parallel(const Vec& nu, const Vec& xi, Vec& par, Vec& perp) {
  const double n2 = norm2sq(nu);
  if (n2 == 0.0) {
    par.assign(xi.size(), 0.0);
    perp = xi;
    return;
  }
  const double c = dot(xi, nu) / n2;
  par = c * nu;
  perp = xi - par;
}
}  // namespace detail

// Action on a spacetime frequency pair:
//   L_nu(xi, tau) = (xi_perp + <nu> xi_par - nu tau, <nu> tau - nu . xi).
inline HyperboloidPoint boost_apply(const LorentzBoost& L,
                                    const HyperboloidPoint& p) {
  if (L.dim() != static_cast<int>(p.xi.size()))
    throw ValidationError("boost_apply: dimension mismatch");
  Vec par, perp;
  detail::split_parallel(L.nu, p.xi, par, perp);
  Vec xi_out = perp + L.bracket_nu * par - p.tau * L.nu;
  double tau_out = L.bracket_nu * p.tau - dot(L.nu, p.xi);
  return HyperboloidPoint(std::move(xi_out), tau_out);
}

// Flattened action on R^d obtained by restricting to the hyperboloid graph:
//   L_nu^flat(xi) = xi_perp + <nu> xi_par - nu <xi>.
inline Vec boost_flat(const LorentzBoost& L, const Vec& xi) {
  if (L.dim() != static_cast<int>(xi.size()))
    throw ValidationError("boost_flat: dimension mismatch");
  Vec par, perp;
  detail::split_parallel(L.nu, xi, par, perp);
  return perp + L.bracket_nu * par - bracket(xi) * L.nu;
}

// Jacobian determinant of boost_flat. The measure dxi/<xi> is invariant, so
// the determinant equals <L^flat(xi)> / <xi>.
inline double boost_flat_jacobian(const LorentzBoost& L, const Vec& xi) {
  return bracket(boost_flat(L, xi)) / bracket(xi);
}

// Central finite-difference determinant of D(boost_flat); the slow
// independent check for boost_flat_jacobian.
inline double boost_flat_jacobian_fd(const LorentzBoost& L, const Vec& xi,
                                     double h = 1e-5) {
  const std::size_t d = xi.size();
  std::vector<Vec> J(d, Vec(d, 0.0));
  for (std::size_t j = 0; j < d; ++j) {
    Vec xp = xi, xm = xi;
    xp[j] += h;
    xm[j] -= h;
    Vec fp = boost_flat(L, xp), fm = boost_flat(L, xm);
    for (std::size_t i = 0; i < d; ++i) J[i][j] = (fp[i] - fm[i]) / (2.0 * h);
  }
  return det_matrix(J);
}

}  // namespace hyperbolax
