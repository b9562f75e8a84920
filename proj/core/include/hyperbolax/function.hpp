#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hyperbolax/geometry.hpp"
#include "hyperbolax/grid.hpp"
#include "hyperbolax/regions.hpp"

namespace hyperbolax {

// Radial C^2 taper: 1 on |xi| <= lo, 0 on |xi| >= hi, quintic smoothstep in
// between. lo/hi default to the constants file.
struct BumpPsi {
  double lo, hi;
  BumpPsi();
  BumpPsi(double lo_, double hi_);
  double operator()(double rho) const;
  // Weight of the dyadic piece at shell N: psi for N = 1, the telescoping
  // difference psi(rho/N) - psi(2 rho/N) for N >= 2.
  double shell_weight(double rho, Dyadic N) const;
};

class SymbolicFunction;
using SymbolicPtr = std::shared_ptr<const SymbolicFunction>;

// Expression tree evaluable at any frequency point; the adaptive-quadrature
// oracle path next to grid sampling.
class SymbolicFunction {
 public:
  static SymbolicPtr gaussian(Vec center, double sigma, cplx amplitude);
  static SymbolicPtr ball_indicator(int d, double radius);
  static SymbolicPtr region_indicator(const LatticeConfig& cfg,
                                      const RegionId& id);
  static SymbolicPtr boosted(SymbolicPtr inner, Vec nu);  // inner(L_nu xi)
  static SymbolicPtr modulated(SymbolicPtr inner, Vec x0, double t0);
  static SymbolicPtr scaled(SymbolicPtr inner, cplx c);
  static SymbolicPtr sum(std::vector<SymbolicPtr> terms);
  static SymbolicPtr shell_piece(SymbolicPtr inner, Dyadic N);

  cplx eval(const Vec& xi) const;
  int dim() const { return d_; }
  // Radius outside which the function is zero or negligible (gaussians are
  // cut at 8 sigma); drives Nyquist checks and quadrature hints.
  double support_radius() const;

  std::string str() const;
  static SymbolicPtr parse(const std::string& text);

 private:
  enum class Tag {
    gaussian,
    ball_indicator,
    region_indicator,
    boosted,
    modulated,
    scaled,
    sum,
    shell_piece
  };

  SymbolicFunction() = default;

  Tag tag_;
  int d_ = 0;
  Vec vec_;          // gaussian center / boost nu / modulation x0
  double scalar_ = 0.0;  // sigma / radius / t0
  cplx coef_{0.0, 0.0};
  int dyadic_e_ = 0;  // shell exponent
  LatticeConfig cfg_{3};
  Region region_{};   // materialized once for indicator evaluation
  std::vector<SymbolicPtr> kids_;
};

// L2(H) norm of a symbolic function by adaptive quadrature.
double symbolic_norm_L2_hyperboloid(const SymbolicFunction& f, double rel_tol);

struct SampledFunction {
  std::shared_ptr<const PolarGrid> grid;
  std::vector<cplx> values;
  std::string family = "custom";   // provenance tag, symbolic expr if known
  std::uint64_t pullback_outside = 0;  // nodes mapped outside coverage

  std::size_t size() const { return values.size(); }
  double w_leb(std::size_t i) const { return grid->w_leb(i); }
  double w_sigma(std::size_t i) const { return grid->w_sigma(i); }
};

SampledFunction sample(const SymbolicPtr& f,
                       std::shared_ptr<const PolarGrid> grid);

double norm_L2_hyperboloid(const SampledFunction& f);
double norm_Ls_lebesgue(const SampledFunction& f, double s);
// Mass fraction accessor for recentering: L2(H) norm over |xi| <= radius.
double norm_L2_hyperboloid_ball(const SampledFunction& f, double radius);

SampledFunction restrict_region(const SampledFunction& f,
                                const LatticeConfig& cfg, const Region& kappa);
SampledFunction angular_piece(const SampledFunction& f, int k, int K);
SampledFunction lp_piece(const SampledFunction& f, Dyadic N);
SampledFunction pullback_boost(const SampledFunction& f, const Vec& nu);
SampledFunction modulate(const SampledFunction& f, const Vec& x0, double t0);

SampledFunction operator+(const SampledFunction& a, const SampledFunction& b);
SampledFunction operator*(cplx c, SampledFunction f);

void save_function(std::ostream& os, const SampledFunction& f);
SampledFunction load_function(std::istream& is);

}  // namespace hyperbolax
