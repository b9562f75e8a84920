#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "hyperbolax/extension.hpp"
#include "hyperbolax/function.hpp"
#include "hyperbolax/grid.hpp"
#include "hyperbolax/regions.hpp"

// Projected gradient ascent on the Rayleigh quotient ||T f||_p / ||f||_2 over
// the unit sphere of L2(H), plus the structure-extraction moves that
// normalize a near-extremal iterate: dominant angular sector, distinguished
// region, Lorentz recentering, modulation removal.

namespace hyperbolax {

struct SearchConfig {
  int d = 3;
  double p = 3.6;
  SpacetimeGrid grid;        // box for every field norm during the search
  PolarGridSpec source;      // sampling grid for starts and the ascent phase
  PolarGridSpec recentered;  // apex-centred grid recentered iterates move to
  double step0 = 1.0;
  double backtrack = 0.5;  // step shrink on a failed line-search probe
  int max_backtracks = 40;
  int max_iters = 200;
  int restarts = 5;
  int epochs = 2;  // ascend / extract rounds inside run_pipeline
  int K = 8;       // angular sectors, must equal 2^d
  double delta1 = 1e-6;  // sector-share floor; the live bar is quotient/(2K)
  double delta2 = 1e-3;  // relative quotient gain below which epochs stop
  double delta3 = 1e-3;  // dominant-shell share floor (reported, not asserted)
  double delta4 = 1e-3;  // modulation peak-to-mean margin before "flat"
  double delta5 = 0.0;   // witness-mass threshold; 0 takes the constants value
  double delta6 = 0.0;   // ball-mass threshold;    0 takes the constants value
  std::uint64_t seed = 1;

  LatticeConfig lattice() const { return LatticeConfig(d); }
  double region_mass_floor() const;  // delta5 resolved against constants()
  double ball_mass_floor() const;    // delta6 resolved against constants()
  void validate() const;
  // Patch source over the unit shell, radius-3 ball for recentered iterates,
  // and a box sized for both phases' bandwidth.
  static SearchConfig defaults(int d, double p);
};

// One recentering round: the boost applied by pullback and the modulation
// shift removed afterwards.
struct RecenterStep {
  Vec nu;
  Vec x0;
  double t0 = 0.0;
};

struct SearchState {
  SampledFunction f;                     // unit L2(H) norm
  std::vector<double> quotient_history;  // start value, then accepted steps
  std::vector<RecenterStep> recenter_log;
  int iteration = 0;
  bool converged = false;  // relative gain fell below policy().ascent_stop_rel
  bool stagnated = false;  // zero gradient or a dead line search

  double quotient() const {
    return quotient_history.empty() ? 0.0 : quotient_history.back();
  }
};

struct RecenterReport {
  Dyadic N_star;             // argmax shell of ||T f_N||_p
  double shell_share = 0.0;  // winning shell norm over ||T f||_p
  bool shell_ok = false;     // shell_share >= delta3
  RegionId region;           // refined-functional witness on that shell
  double region_mass = 0.0;  // L2(H) mass of f inside the witness region
  bool region_mass_ok = false;  // region_mass >= resolved delta5
  Vec nu;                    // pullback by nu sends c(region) to the apex
  double ball_radius = 0.0;
  double mass_in_ball = 0.0;  // recentered unit-mass share in that ball
};

struct AngularSelection {
  int k = 1;          // winning sector, 1-based orthant index
  double share = 0.0;  // ||T f^(k)||_p; always >= ||T f||_p / K
};

struct ModulationShift {
  Vec x0;
  double t0 = 0.0;
  bool degenerate = false;  // field numerically flat, shift left at zero
};

struct PipelineResult {
  SearchState best;                       // restart with best rescored value
  std::vector<double> restart_quotients;  // final ascent quotient per restart
  std::vector<RecenterReport> reports;    // structure rounds of that restart
  double rescored_quotient = 0.0;         // best iterate on the doubled grid
};

// Unit L2(H) rescale; throws ValidationError on zero input.
SampledFunction normalized(const SampledFunction& f);

// T*(F)(xi) = sum_{x,t} e^{-i x.xi} e^{-i t <xi>} F(x,t) w_{x,t} on the
// target nodes, with the same Simpson box weights the norms use, so
// <extend(f), F>_box = <f, adjoint_extend(F)>_{L2(H)} up to extension error.
SampledFunction adjoint_extend(const ExtensionField& F,
                               std::shared_ptr<const PolarGrid> target);

// Gradient of f -> ||T f||_p^p, namely T*(p |T f|^{p-2} T f), so that
// d/ds ||T(f + s h)||_p^p at s = 0 equals Re <grad, h>_{L2(H)}.
SampledFunction ascent_direction(const SampledFunction& f, double p,
                                 const SpacetimeGrid& grid);

// Projected ascent from f0 (normalized first). A step is accepted when the
// quotient does not decrease (1e-12 slack), shrinking by cfg.backtrack at
// most cfg.max_backtracks times; stops at cfg.max_iters, on converged, or on
// stagnated. The history is nondecreasing by construction.
SearchState ascend(const SampledFunction& f0, const SearchConfig& cfg);

// Argmax of ||T f^(k)||_p over the 2^d sign-orthant sectors.
AngularSelection select_angular_sector(const SampledFunction& f, int K,
                                       double p, const SpacetimeGrid& grid);

// Dominant dyadic shell, then the refined-functional witness region on it.
// Fills everything except mass_in_ball, which recenter() measures after the
// boost. Throws when every shell piece is numerically zero.
RecenterReport find_distinguished_region(const SampledFunction& f,
                                         const SearchConfig& cfg);

// Pull f back by report.nu onto cfg.recentered (the witness centre lands on
// the apex), renormalize, and measure the ball mass. Interpolation is not an
// exact isometry; callers compare quotients before and after.
std::pair<SampledFunction, RecenterReport> recenter(
    const SampledFunction& f, const RecenterReport& report,
    const SearchConfig& cfg);

// Argmax of |T f| over the box. The returned shift feeds modulate(f, x0, t0)
// directly and moves that peak to the spacetime origin. Fields whose peak
// exceeds the mean by less than flat_margin relatively are flagged degenerate
// and the shift is left at zero.
ModulationShift extract_modulation(const SampledFunction& f,
                                   const SpacetimeGrid& grid,
                                   double flat_margin = 1e-3);

// Seeded multistart driver: each restart alternates an ascent epoch with
// sector selection, region detection, recentering (only when the witness
// holds the delta5 mass) and modulation removal, then the final iterate is
// rescored on a node-doubled copy of cfg.grid. Deterministic for a fixed
// config, including across repeated runs in one process.
PipelineResult run_pipeline(const SearchConfig& cfg);

}  // namespace hyperbolax
