#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "hyperbolax/extension.hpp"
#include "hyperbolax/function.hpp"
#include "hyperbolax/regions.hpp"

// Two-sided functionals for the inequality suite: every estimate is exposed
// as a computable lhs/rhs pair with the maximizing sub-object recorded, so
// sweeps can watch ratios instead of trusting constants.

namespace hyperbolax {

struct AdmissiblePair {
  double q = 2.0;
  double r = 2.0;
  double theta = 1.0;  // interpolation weight in [0, 1]
};

// Exponent bundle for the refined functional. gamma defaults to the midpoint
// of (0, 1 - 2/p); s is the Lebesgue exponent on the right-hand sides with
// conjugate s_prime.
struct ExponentSet {
  int d = 3;
  double p = 3.6;
  double gamma = 0.0;
  double s = 1.9;
  double s_prime = 1.9 / 0.9;

  static ExponentSet defaults(int d, double p);
  void validate() const;  // throws ValidationError naming the failed bound
};

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;        // lhs / rhs when rhs > 0
  std::string witness;       // maximizing sub-object, human-readable
  bool unreliable = false;   // some extension norm carried a truncation flag
  bool degenerate = false;   // rhs vanished; ratio not meaningful
};

// Admissible p interval: d = 1 gives [6, inf); d >= 2 gives
// [2(d+2)/d, 2(d+1)/(d-1)]. Second element is +inf for d = 1.
std::pair<double, double> p_range(int d);

// 2/q + (d-1+theta)/r = (d-1+theta)/2 with q in [2,inf], r in [2, 2d/(d-2)]
// for d >= 3, theta in [0,1], excluding (q,r) = (2,inf). q or r may be
// infinity.
bool is_admissible_pair(double q, double r, double theta, int d);

// Two admissible pairs splitting p: 2/p = 1/q0 + 1/q1 = 1/r0 + 1/r1 with
// q1 < p < q0, r0 < p < r1, and the geometric-series gain 1/q1 - 1/r1 > 0.
// Deterministic: returns the feasible pair maximizing its worst constraint
// margin. Throws with the violated constraint listed when p is not strictly
// inside the d >= 3 range or no pair exists.
std::pair<AdmissiblePair, AdmissiblePair> select_mixed_pairs(double p, int d);

// (expN, expR) for the bilinear right-hand side N^expN r^expR:
//   caps    -> (-2/s, 2d/s' - 2(d+2)/p)
//   sectors -> (-2/s, 2(d-1)/s' - 2(d+1)/p)
std::pair<double, double> bilinear_exponents(int d, double p, double s,
                                             RegionKind regime);

// lhs = ||T f||_p^p, rhs = sup_N ||T f_N||_p^{p-2} * ||f||_{L2(H)}^2 over the
// dyadic shells meeting the support; witness names the argmax shell.
InequalityReport decoupling_report(const SampledFunction& f, double p, int d,
                                   const SpacetimeGrid& grid);

// lhs = ||T(f_kappa) T(g_kappa')||_{p/2}; rhs = N^expN r^expR ||f_kappa||_s
// ||g_kappa'||_s with the exponents of the pair's regime. Regions must be
// separated.
InequalityReport bilinear_report(const SampledFunction& f,
                                 const SampledFunction& g,
                                 const RegionId& kappa,
                                 const RegionId& kappa_prime, double s,
                                 double p, const SpacetimeGrid& grid,
                                 const LatticeConfig& cfg = LatticeConfig{});

// Refined functional on shell N: lhs = ||T f_N||_p^p against the two-branch
// supremum over caps (r <= 1) and sectors (1 < r <= N) of
//   (r^d or r^{d-1})^{(p/2 - c_d)(1-gamma)} ||T f_kappa||_p^{p gamma}
// times ||f_N||_{L2(H)}^{p(1-gamma)}; witness is the argmax (r, kappa).
// Enumeration floor r >= 2^whitney_floor_exp from the constants file; caps
// finer than that are excluded and the exclusion noted in the witness.
InequalityReport refined_report(const SampledFunction& f, Dyadic N,
                                const ExponentSet& exps,
                                const SpacetimeGrid& grid,
                                const LatticeConfig& cfg = LatticeConfig{},
                                RegionId* argmax = nullptr);

// Exact tiling identity on shell N: ||T f_N||_p^p against
// ||sum_{r, kappa ~ kappa'} T(f_kappa) T(f_kappa')||_{p/2}^{p/2} with the
// pieces enumerated down to scale r_min and the still-uncovered near-diagonal
// pairs grouped at their generation-(d-1) ancestors, so the regrouping is
// exact at any cutoff and the reported deviation is pure quadrature.
InequalityReport whitney_reconstruction_check(
    const SampledFunction& f, Dyadic N, double p, const SpacetimeGrid& grid,
    const LatticeConfig& cfg = LatticeConfig{},
    Dyadic r_min = Dyadic::from_exponent(-4));

// Structured-text serialization: one "key=value" field per line.
void print_report(std::ostream& os, const InequalityReport& rep);

}  // namespace hyperbolax
