#include "hyperbolax/constants.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "hyperbolax/common.hpp"

namespace hyperbolax {

namespace {

// Lift eta in C1 to the unit sphere and return the geodesic distance.
double lift_geodesic(const Vec& a, const Vec& b) {
  auto lift = [](const Vec& h) {
    Vec u = h;
    u.push_back(std::sqrt(1.0 - norm2sq(h)));
    return u;
  };
  Vec ua = lift(a), ub = lift(b);
  double chord = norm2(ua - ub);
  return 2.0 * std::asin(0.5 * chord);
}

// Dense-sample the distortion inequality |h-k| <= dist(h*,k*) <= (1+eps1)|h-k|
// over the (d-1)-cube of half-side ell, d-1 = 2 (the worst case grows with
// the cube diagonal, so checking the largest supported cross-section covers
// the lower-dimensional lattices as well).
void check_distortion(double ell, double eps1) {
  const int n = 9;
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pts.push_back({ell * (2.0 * i / (n - 1) - 1.0), ell * (2.0 * j / (n - 1) - 1.0)});
  // Radial near-coincident pairs realize the supremum of dist/|h-k|.
  std::size_t base = pts.size();
  for (std::size_t i = 0; i < base; ++i) {
    if (norm2(pts[i]) == 0.0) continue;
    pts.push_back(0.999 * pts[i]);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double flat = norm2(pts[i] - pts[j]);
      if (flat < 1e-12) continue;
      double geo = lift_geodesic(pts[i], pts[j]);
      if (geo < flat * (1.0 - 1e-12) || geo > (1.0 + eps1) * flat)
        throw ValidationError(
            "constants: lift distortion bound fails for ell=" + std::to_string(ell) +
            ", eps1=" + std::to_string(eps1));
    }
}

}  // namespace

void Constants::validate() const {
  if (version.rfind("hyperbolax-constants-", 0) != 0)
    throw ValidationError("constants: bad version string '" + version + "'");
  if (!(ell > 0.0 && ell < 0.25))
    throw ValidationError("constants: ell must lie in (0, 1/4)");
  if (!(eps1 > 0.0 && eps1 < 1.0))
    throw ValidationError("constants: eps1 must lie in (0, 1)");
  check_distortion(ell, eps1);
  if (!(taper_lo == 1.0 && taper_hi == 1.1))
    throw ValidationError("constants: taper must vanish outside [1, 11/10]");
  if (!(volume_ratio_cap_lo > 0.0 && volume_ratio_cap_lo < volume_ratio_cap_hi))
    throw ValidationError("constants: cap volume interval is empty or negative");
  if (!(volume_ratio_sector_lo > 0.0 &&
        volume_ratio_sector_lo < volume_ratio_sector_hi))
    throw ValidationError("constants: sector volume interval is empty or negative");
  if (!(sumset_vertical_lo > 0.0 && sumset_vertical_lo < sumset_vertical_hi))
    throw ValidationError("constants: sumset vertical band is empty or negative");
  if (!(sumset_radial_hi > 0.0 && sumset_angular_hi > 0.0))
    throw ValidationError("constants: sumset halfwidths must be positive");
  if (!(center_radial_hi > 0.0 && center_angular_hi > 0.0))
    throw ValidationError("constants: center displacement bounds must be positive");
  if (!(separation_center_lo > 0.0))
    throw ValidationError("constants: separation lower constant must be positive");
  if (partner_max_d3 < 0)
    throw ValidationError("constants: partner_max_d3 must be nonnegative");
  if (!(ball_radius > 0.0))
    throw ValidationError("constants: ball_radius must be positive");
  if (!(refined_prune_constant > 1.0))
    throw ValidationError("constants: refined_prune_constant must exceed 1");
  if (whitney_floor_exp > 0)
    throw ValidationError("constants: whitney_floor_exp must be <= 0");
  if (!(delta_region_mass > 0.0 && delta_ball_mass > 0.0))
    throw ValidationError("constants: pipeline thresholds must be positive");
}

namespace {

template <typename T>
void parse_into(T& slot, const std::string& value, const std::string& key) {
  std::istringstream iss(value);
  iss >> slot;
  if (iss.fail()) throw ValidationError("constants: cannot parse value for " + key);
}

void assign(Constants& c, const std::string& key, const std::string& value) {
  if (key == "version") { c.version = value; return; }
  if (key == "ell") return parse_into(c.ell, value, key);
  if (key == "eps1") return parse_into(c.eps1, value, key);
  if (key == "taper_lo") return parse_into(c.taper_lo, value, key);
  if (key == "taper_hi") return parse_into(c.taper_hi, value, key);
  if (key == "volume_ratio_cap_lo") return parse_into(c.volume_ratio_cap_lo, value, key);
  if (key == "volume_ratio_cap_hi") return parse_into(c.volume_ratio_cap_hi, value, key);
  if (key == "volume_ratio_sector_lo") return parse_into(c.volume_ratio_sector_lo, value, key);
  if (key == "volume_ratio_sector_hi") return parse_into(c.volume_ratio_sector_hi, value, key);
  if (key == "sumset_vertical_lo") return parse_into(c.sumset_vertical_lo, value, key);
  if (key == "sumset_vertical_hi") return parse_into(c.sumset_vertical_hi, value, key);
  if (key == "sumset_radial_hi") return parse_into(c.sumset_radial_hi, value, key);
  if (key == "sumset_angular_hi") return parse_into(c.sumset_angular_hi, value, key);
  if (key == "center_radial_hi") return parse_into(c.center_radial_hi, value, key);
  if (key == "center_angular_hi") return parse_into(c.center_angular_hi, value, key);
  if (key == "separation_center_lo") return parse_into(c.separation_center_lo, value, key);
  if (key == "partner_max_d3") return parse_into(c.partner_max_d3, value, key);
  if (key == "alpha_cap_exp") return parse_into(c.alpha_cap_exp, value, key);
  if (key == "ball_radius") return parse_into(c.ball_radius, value, key);
  if (key == "refined_prune_constant") return parse_into(c.refined_prune_constant, value, key);
  if (key == "corpus_decoupling_ratio_max") return parse_into(c.corpus_decoupling_ratio_max, value, key);
  if (key == "corpus_refined_ratio_max") return parse_into(c.corpus_refined_ratio_max, value, key);
  if (key == "whitney_floor_exp") return parse_into(c.whitney_floor_exp, value, key);
  if (key == "delta_region_mass") return parse_into(c.delta_region_mass, value, key);
  if (key == "delta_ball_mass") return parse_into(c.delta_ball_mass, value, key);
  throw ValidationError("constants: unknown key '" + key + "'");
}

}  // namespace

Constants load_constants_file(const std::string& path, Constants base) {
  std::ifstream in(path);
  if (!in) throw ValidationError("constants: cannot open file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("constants: malformed line " + std::to_string(lineno) +
                            " in " + path);
    assign(base, line.substr(0, eq), line.substr(eq + 1));
  }
  base.validate();
  return base;
}

std::string constants_to_text(const Constants& c) {
  std::ostringstream os;
  os.precision(17);
  os << "version=" << c.version << "\n";
  os << "ell=" << c.ell << "\n";
  os << "eps1=" << c.eps1 << "\n";
  os << "taper_lo=" << c.taper_lo << "\n";
  os << "taper_hi=" << c.taper_hi << "\n";
  os << "volume_ratio_cap_lo=" << c.volume_ratio_cap_lo << "\n";
  os << "volume_ratio_cap_hi=" << c.volume_ratio_cap_hi << "\n";
  os << "volume_ratio_sector_lo=" << c.volume_ratio_sector_lo << "\n";
  os << "volume_ratio_sector_hi=" << c.volume_ratio_sector_hi << "\n";
  os << "sumset_vertical_lo=" << c.sumset_vertical_lo << "\n";
  os << "sumset_vertical_hi=" << c.sumset_vertical_hi << "\n";
  os << "sumset_radial_hi=" << c.sumset_radial_hi << "\n";
  os << "sumset_angular_hi=" << c.sumset_angular_hi << "\n";
  os << "center_radial_hi=" << c.center_radial_hi << "\n";
  os << "center_angular_hi=" << c.center_angular_hi << "\n";
  os << "separation_center_lo=" << c.separation_center_lo << "\n";
  os << "partner_max_d3=" << c.partner_max_d3 << "\n";
  os << "alpha_cap_exp=" << c.alpha_cap_exp << "\n";
  os << "ball_radius=" << c.ball_radius << "\n";
  os << "refined_prune_constant=" << c.refined_prune_constant << "\n";
  os << "corpus_decoupling_ratio_max=" << c.corpus_decoupling_ratio_max << "\n";
  os << "corpus_refined_ratio_max=" << c.corpus_refined_ratio_max << "\n";
  os << "whitney_floor_exp=" << c.whitney_floor_exp << "\n";
  os << "delta_region_mass=" << c.delta_region_mass << "\n";
  os << "delta_ball_mass=" << c.delta_ball_mass << "\n";
  return os.str();
}

const Constants& constants() {
  static const Constants c = [] {
    Constants base;
    if (const char* path = std::getenv("HYPERBOLAX_CONSTANTS"))
      base = load_constants_file(path);
    else
      base.validate();
    return base;
  }();
  return c;
}

}  // namespace hyperbolax
