#pragma once

#include <optional>
#include <string>

#include "hyperbolax/common.hpp"

namespace hyperbolax {

// Frozen empirical constants. The defaults below were produced once by the
// `hyperbolax calibrate` sweep and are regression-pinned by the test suite;
// a file named by HYPERBOLAX_CONSTANTS (or --constants) can override entries,
// and validate() re-checks every structural invariant after loading.
struct Constants {
  std::string version = "hyperbolax-constants-v1";

  // Base cube half-side and admissible lift distortion.
  double ell = 0.0625;  // 1/16
  double eps1 = 0.01;

  // Smooth radial taper: identically 1 below taper_lo, 0 above taper_hi.
  double taper_lo = 1.0;
  double taper_hi = 1.1;

  // Lebesgue volume of caps/sectors divided by N r^d resp. N r^(d-1), d = 3.
  double volume_ratio_cap_lo = 4.0e-3;
  double volume_ratio_cap_hi = 1.1e-1;
  double volume_ratio_sector_lo = 3.9e-2;
  double volume_ratio_sector_hi = 4.3e-2;

  // Sumset box for separated pairs: vertical band in units of r^2/N, radial
  // halfwidth in units of min(1,r) N, transverse halfwidth in units of r.
  double sumset_vertical_lo = 1.0e-3;
  double sumset_vertical_hi = 4.0;
  double sumset_radial_hi = 4.0;
  double sumset_angular_hi = 2.0;

  // Per-region center displacement bounds, same unit conventions.
  double center_radial_hi = 2.0;
  double center_angular_hi = 1.0;

  // Separated-pair center distances: at least one of angular/r, radial/(Nr)
  // exceeds this; both stay below the sumset upper constants.
  double separation_center_lo = 0.2;

  // Maximum number of separated partners of any region, d = 3.
  int partner_max_d3 = 0;  // 0 means "not yet calibrated"

  // Distinguished regions appear at scales r <= 2^alpha; the boosted image
  // of every such region lies in the ball of radius ball_radius.
  int alpha_cap_exp = 2;
  double ball_radius = 8.0;

  // Crude operator bound ||T f||_p <= C ||f||_2 used only to skip provably
  // sub-maximal regions inside report suprema.
  double refined_prune_constant = 40.0;

  // Regression ceilings for the 12-function calibration corpus.
  double corpus_decoupling_ratio_max = 0.0;  // 0 means "not yet calibrated"
  double corpus_refined_ratio_max = 0.0;

  // Default enumeration floor for cap scales: r >= 2^whitney_floor_exp.
  int whitney_floor_exp = -6;

  // Reported (not asserted) pipeline thresholds.
  double delta_region_mass = 0.1;   // |f restricted to witness| vs this
  double delta_ball_mass = 0.1;     // recentered mass in the universal ball

  void validate() const;  // throws ValidationError naming the failed invariant
};

// Immutable process-wide constants: defaults, overridden once from the file
// named by HYPERBOLAX_CONSTANTS if that variable is set.
const Constants& constants();

// Parse a key=value constants file over the given base record.
Constants load_constants_file(const std::string& path, Constants base = {});

// Serialize in the exact key=value format load_constants_file accepts.
std::string constants_to_text(const Constants& c);

}  // namespace hyperbolax
