#include "hyperbolax/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hyperbolax/constants.hpp"
#include "hyperbolax/numeric.hpp"

namespace hyperbolax {

AxisQuad gl_panel_axis(const Vec& edges, int nodes_per_panel) {
  if (edges.size() < 2) throw ValidationError("gl_panel_axis: need >= 2 edges");
  if (nodes_per_panel < 1)
    throw ValidationError("gl_panel_axis: need >= 1 node per panel");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw ValidationError("gl_panel_axis: edges must be increasing");
  const GaussRule& rule = gauss_legendre(nodes_per_panel);
  AxisQuad axis;
  axis.lo = edges.front();
  axis.hi = edges.back();
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (int i = 0; i < nodes_per_panel; ++i) {
      axis.nodes.push_back(mid + half * rule.x[i]);
      axis.weights.push_back(half * rule.w[i]);
    }
  }
  return axis;
}

AxisQuad periodic_axis(double period, int n) {
  if (!(period > 0.0) || n < 1)
    throw ValidationError("periodic_axis: need positive period and count");
  AxisQuad axis;
  axis.periodic = true;
  axis.lo = 0.0;
  axis.hi = period;
  const double h = period / n;
  for (int i = 0; i < n; ++i) {
    axis.nodes.push_back((i + 0.5) * h);
    axis.weights.push_back(h);
  }
  return axis;
}

namespace {

std::string fmt_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

const char* domain_name(PolarDomain dom) {
  switch (dom) {
    case PolarDomain::patch: return "patch";
    case PolarDomain::sphere: return "sphere";
    case PolarDomain::ball: return "ball";
  }
  throw ValidationError("unknown polar domain");
}

PolarDomain domain_from(const std::string& name) {
  if (name == "patch") return PolarDomain::patch;
  if (name == "sphere") return PolarDomain::sphere;
  if (name == "ball") return PolarDomain::ball;
  throw ValidationError("unknown polar domain: " + name);
}

}  // namespace

std::string PolarGridSpec::str() const {
  std::ostringstream os;
  os << "domain=" << domain_name(domain) << " d=" << d
     << " radial_nodes=" << radial_nodes << " angular_cells=" << angular_cells
     << " angular_nodes=" << angular_nodes << " phi_nodes=" << phi_nodes
     << " ell=" << fmt_hex(ell) << " edges=";
  for (std::size_t i = 0; i < radial_edges.size(); ++i)
    os << (i ? "," : "") << fmt_hex(radial_edges[i]);
  return os.str();
}

PolarGridSpec PolarGridSpec::parse(const std::string& line) {
  PolarGridSpec spec;
  spec.radial_edges.clear();
  std::istringstream is(line);
  std::string token;
  bool saw_edges = false;
  while (is >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw ValidationError("grid spec: malformed token " + token);
    const std::string key = token.substr(0, eq);
    const std::string val = token.substr(eq + 1);
    if (key == "domain") {
      spec.domain = domain_from(val);
    } else if (key == "d") {
      spec.d = std::stoi(val);
    } else if (key == "radial_nodes") {
      spec.radial_nodes = std::stoi(val);
    } else if (key == "angular_cells") {
      spec.angular_cells = std::stoi(val);
    } else if (key == "angular_nodes") {
      spec.angular_nodes = std::stoi(val);
    } else if (key == "phi_nodes") {
      spec.phi_nodes = std::stoi(val);
    } else if (key == "ell") {
      spec.ell = std::strtod(val.c_str(), nullptr);
    } else if (key == "edges") {
      saw_edges = true;
      std::istringstream es(val);
      std::string item;
      while (std::getline(es, item, ','))
        spec.radial_edges.push_back(std::strtod(item.c_str(), nullptr));
    } else {
      throw ValidationError("grid spec: unknown key " + key);
    }
  }
  if (!saw_edges) throw ValidationError("grid spec: missing edges");
  return spec;
}

PolarGrid::PolarGrid(PolarGridSpec spec) : spec_(std::move(spec)) {
  const int d = spec_.d;
  if (d < 2 || d > 4)
    throw ValidationError("PolarGrid: supported dimensions are 2..4");
  if (spec_.radial_edges.size() < 2)
    throw ValidationError("PolarGrid: need at least one radial panel");
  const double lead = spec_.radial_edges.front();
  if (spec_.domain == PolarDomain::ball) {
    if (lead != 0.0)
      throw ValidationError("PolarGrid: ball grids start at rho = 0");
  } else if (!(lead > 0.0)) {
    throw ValidationError("PolarGrid: annular grids need rho_min > 0");
  }
  if (spec_.angular_cells < 1 || spec_.angular_nodes < 1)
    throw ValidationError("PolarGrid: angular resolution must be positive");
  if (spec_.ell == 0.0) spec_.ell = constants().ell;

  radial_ = gl_panel_axis(spec_.radial_edges, spec_.radial_nodes);
  radial_w_.resize(radial_.nodes.size());
  bracket_.resize(radial_.nodes.size());
  for (std::size_t i = 0; i < radial_.nodes.size(); ++i) {
    const double rho = radial_.nodes[i];
    radial_w_[i] = radial_.weights[i] * std::pow(rho, d - 1);
    bracket_[i] = std::sqrt(1.0 + rho * rho);
  }

  if (spec_.domain == PolarDomain::patch) {
    const double ell = spec_.ell;
    Vec edges(spec_.angular_cells + 1);
    for (int i = 0; i <= spec_.angular_cells; ++i)
      edges[i] = -ell + 2.0 * ell * i / spec_.angular_cells;
    edges.back() = ell;
    for (int a = 0; a < d - 1; ++a)
      angular_axes_.push_back(gl_panel_axis(edges, spec_.angular_nodes));
  } else {
    if (spec_.phi_nodes == 0)
      spec_.phi_nodes = std::max(8, 2 * spec_.angular_cells * spec_.angular_nodes);
    if (d == 4) {
      Vec tedges(spec_.angular_cells + 1);
      for (int i = 0; i <= spec_.angular_cells; ++i)
        tedges[i] = kPi * i / spec_.angular_cells;
      angular_axes_.push_back(gl_panel_axis(tedges, spec_.angular_nodes));
      angular_axes_.back().pole_lo = angular_axes_.back().pole_hi = true;
    }
    if (d >= 3) {
      Vec zedges(spec_.angular_cells + 1);
      for (int i = 0; i <= spec_.angular_cells; ++i)
        zedges[i] = -1.0 + 2.0 * i / spec_.angular_cells;
      zedges.back() = 1.0;
      angular_axes_.push_back(gl_panel_axis(zedges, spec_.angular_nodes));
      angular_axes_.back().pole_lo = angular_axes_.back().pole_hi = true;
    }
    angular_axes_.push_back(periodic_axis(2.0 * kPi, spec_.phi_nodes));
  }

  n_angular_ = 1;
  for (const AxisQuad& axis : angular_axes_) n_angular_ *= axis.nodes.size();

  directions_.resize(n_angular_);
  angular_w_.resize(n_angular_);
  std::vector<std::size_t> idx(angular_axes_.size(), 0);
  for (std::size_t ia = 0; ia < n_angular_; ++ia) {
    Vec coord(angular_axes_.size());
    double w = 1.0;
    for (std::size_t a = 0; a < angular_axes_.size(); ++a) {
      coord[a] = angular_axes_[a].nodes[idx[a]];
      w *= angular_axes_[a].weights[idx[a]];
    }
    Vec dir(d);
    if (spec_.domain == PolarDomain::patch) {
      double sq = 0.0;
      for (int i = 0; i < d - 1; ++i) {
        dir[i] = coord[i];
        sq += coord[i] * coord[i];
      }
      if (sq >= 1.0)
        throw ValidationError("PolarGrid: patch cube exits the unit disc");
      dir[d - 1] = std::sqrt(1.0 - sq);
      w /= dir[d - 1];  // graph parametrization of the sphere
    } else if (d == 2) {
      dir = {std::cos(coord[0]), std::sin(coord[0])};
    } else if (d == 3) {
      const double z = coord[0], phi = coord[1];
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      dir = {s * std::cos(phi), s * std::sin(phi), z};
    } else {
      const double th = coord[0], z = coord[1], phi = coord[2];
      const double st = std::sin(th);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      dir = {st * s * std::cos(phi), st * s * std::sin(phi), st * z,
             std::cos(th)};
      w *= st * st;
    }
    directions_[ia] = std::move(dir);
    angular_w_[ia] = w;

    for (std::size_t a = angular_axes_.size(); a-- > 0;) {
      if (++idx[a] < angular_axes_[a].nodes.size()) break;
      idx[a] = 0;
    }
  }
}

Vec PolarGrid::node(std::size_t idx) const {
  const double r = rho(idx / n_angular_);
  Vec xi = directions_[idx % n_angular_];
  for (double& c : xi) c *= r;
  return xi;
}

bool PolarGrid::angular_coords(const Vec& xi, double rho, Vec* coords) const {
  const int d = spec_.d;
  if (spec_.domain == PolarDomain::patch) {
    if (!(xi[d - 1] > 0.0)) return false;
    coords->resize(d - 1);
    for (int i = 0; i < d - 1; ++i) {
      (*coords)[i] = xi[i] / rho;
      if (std::abs((*coords)[i]) > spec_.ell) return false;
    }
    return true;
  }
  if (d == 2) {
    double phi = std::atan2(xi[1], xi[0]);
    if (phi < 0.0) phi += 2.0 * kPi;
    *coords = {phi};
    return true;
  }
  double phi = std::atan2(xi[1], xi[0]);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (d == 3) {
    *coords = {std::clamp(xi[2] / rho, -1.0, 1.0), phi};
    return true;
  }
  const double ct = std::clamp(xi[3] / rho, -1.0, 1.0);
  const double th = std::acos(ct);
  const double st = std::sin(th);
  const double z = st > 1e-14 ? std::clamp(xi[2] / (rho * st), -1.0, 1.0) : 0.0;
  *coords = {th, z, phi};
  return true;
}

namespace {

struct AxisBracket {
  std::size_t i0, i1;
  double t;       // weight on i1, or on the pole when pole != 0
  int pole = 0;   // -1/+1: query sits between the end node and a pole
};

bool bracket_axis(const AxisQuad& axis, double x, AxisBracket* out) {
  const Vec& nodes = axis.nodes;
  const std::size_t n = nodes.size();
  if (axis.periodic) {
    const double period = axis.hi - axis.lo;
    double y = std::fmod(x - axis.lo, period);
    if (y < 0.0) y += period;
    y += axis.lo;
    if (n == 1) {
      *out = {0, 0, 0.0};
      return true;
    }
    auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
    if (it == nodes.begin() || it == nodes.end()) {
      const double gap = period - nodes.back() + nodes.front();
      const double offset =
          it == nodes.begin() ? y - nodes.back() + period : y - nodes.back();
      *out = {n - 1, 0, offset / gap};
      return true;
    }
    const std::size_t hi = std::size_t(it - nodes.begin());
    *out = {hi - 1, hi, (y - nodes[hi - 1]) / (nodes[hi] - nodes[hi - 1])};
    return true;
  }
  const double tol = 1e-12 * (std::abs(axis.lo) + std::abs(axis.hi) + 1.0);
  if (x < axis.lo - tol || x > axis.hi + tol) return false;
  if (n == 1 || x <= nodes.front()) {
    double t = 0.0;
    if (axis.pole_lo && x < nodes.front() && nodes.front() > axis.lo)
      t = std::min(1.0, (nodes.front() - x) / (nodes.front() - axis.lo));
    *out = {0, 0, t, axis.pole_lo && t > 0.0 ? -1 : 0};
    return true;
  }
  if (x >= nodes.back()) {
    double t = 0.0;
    if (axis.pole_hi && x > nodes.back() && axis.hi > nodes.back())
      t = std::min(1.0, (x - nodes.back()) / (axis.hi - nodes.back()));
    *out = {n - 1, n - 1, t, axis.pole_hi && t > 0.0 ? 1 : 0};
    return true;
  }
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t hi = std::size_t(it - nodes.begin());
  *out = {hi - 1, hi, (x - nodes[hi - 1]) / (nodes[hi] - nodes[hi - 1])};
  return true;
}

// Multilinear over the angular axes; beyond the last ring of a pole axis the
// value blends toward the quadrature mean of the ring block (all later axes
// are contiguous in the row-major layout), which is the second-order pole
// estimate a clamped ring cannot provide.
cplx interp_angular(const std::vector<AxisQuad>& axes, const Vec& aw,
                    const std::vector<cplx>& values, std::size_t ir_off,
                    const std::vector<AxisBracket>& ab, std::size_t a,
                    std::size_t base) {
  if (a == axes.size()) return values[ir_off + base];
  const AxisBracket& b = ab[a];
  const std::size_t na = axes[a].nodes.size();
  if (b.pole != 0) {
    const std::size_t ring = base * na + b.i0;
    const cplx ringv = interp_angular(axes, aw, values, ir_off, ab, a + 1, ring);
    if (b.t == 0.0) return ringv;
    std::size_t block = 1;
    for (std::size_t q = a + 1; q < axes.size(); ++q)
      block *= axes[q].nodes.size();
    const std::size_t start = ring * block;
    double wsum = 0.0;
    cplx mean{0.0, 0.0};
    for (std::size_t j = 0; j < block; ++j) {
      wsum += aw[start + j];
      mean += aw[start + j] * values[ir_off + start + j];
    }
    return (1.0 - b.t) * ringv + (b.t / wsum) * mean;
  }
  const cplx lo =
      interp_angular(axes, aw, values, ir_off, ab, a + 1, base * na + b.i0);
  if (b.t == 0.0) return lo;
  const cplx hi =
      interp_angular(axes, aw, values, ir_off, ab, a + 1, base * na + b.i1);
  return (1.0 - b.t) * lo + b.t * hi;
}

}  // namespace

cplx PolarGrid::interpolate(const std::vector<cplx>& values, const Vec& xi,
                            std::uint64_t* outside) const {
  if (values.size() != size())
    throw ValidationError("interpolate: value count does not match grid");
  if (int(xi.size()) != spec_.d)
    throw ValidationError("interpolate: dimension mismatch");
  const double r = norm2(xi);
  Vec coords;
  AxisBracket rb;
  if (r < 1e-300 || !bracket_axis(radial_, r, &rb) ||
      !angular_coords(xi, r, &coords)) {
    if (outside) ++*outside;
    return {0.0, 0.0};
  }
  std::vector<AxisBracket> ab(angular_axes_.size());
  for (std::size_t a = 0; a < angular_axes_.size(); ++a) {
    if (!bracket_axis(angular_axes_[a], coords[a], &ab[a])) {
      if (outside) ++*outside;
      return {0.0, 0.0};
    }
  }
  cplx acc = (1.0 - rb.t) * interp_angular(angular_axes_, angular_w_, values,
                                           rb.i0 * n_angular_, ab, 0, 0);
  if (rb.t != 0.0)
    acc += rb.t * interp_angular(angular_axes_, angular_w_, values,
                                 rb.i1 * n_angular_, ab, 0, 0);
  return acc;
}

Vec taper_edges(double N) {
  const Constants& c = constants();
  return {0.5 * N, 0.5 * c.taper_hi * N, c.taper_lo * N, c.taper_hi * N};
}

namespace {

Vec merge_edges(Vec edges, const Vec& extra, double lo, double hi) {
  for (double e : extra)
    if (e > lo && e < hi) edges.push_back(e);
  std::sort(edges.begin(), edges.end());
  Vec out;
  for (double e : edges)
    if (out.empty() || e > out.back() * (1.0 + 1e-12) + 1e-300)
      out.push_back(e);
  return out;
}

}  // namespace

PolarGridSpec patch_spec(const LatticeConfig& cfg, Dyadic N, Dyadic r_align,
                         int radial_nodes, int angular_cells,
                         int angular_nodes) {
  if (angular_cells & (angular_cells - 1))
    throw ValidationError("patch_spec: angular_cells must be a power of two");
  const double halfN = 0.5 * N.value();
  Vec edges;
  if (r_align <= Dyadic(0)) {
    const int layers = layer_count(r_align);
    for (int j = 0; j <= layers; ++j)
      edges.push_back(halfN * (1.0 + 3.0 * j * r_align.value()));
  } else {
    edges = {halfN, 2.0 * N.value()};
  }
  edges = merge_edges(std::move(edges), taper_edges(N.value()), edges.front(),
                      edges.back());
  PolarGridSpec spec;
  spec.domain = PolarDomain::patch;
  spec.d = cfg.d;
  spec.radial_edges = std::move(edges);
  spec.radial_nodes = radial_nodes;
  spec.angular_cells = angular_cells;
  spec.angular_nodes = angular_nodes;
  spec.ell = cfg.ell;
  return spec;
}

PolarGridSpec sphere_spec(int d, double rho_min, double rho_max,
                          int radial_panels, int radial_nodes,
                          int angular_cells, int angular_nodes) {
  if (!(rho_min > 0.0 && rho_max > rho_min) || radial_panels < 1)
    throw ValidationError("sphere_spec: invalid radial extent");
  Vec edges(radial_panels + 1);
  for (int i = 0; i <= radial_panels; ++i)
    edges[i] = rho_min + (rho_max - rho_min) * i / radial_panels;
  edges.back() = rho_max;
  PolarGridSpec spec;
  spec.domain = PolarDomain::sphere;
  spec.d = d;
  spec.radial_edges = std::move(edges);
  spec.radial_nodes = radial_nodes;
  spec.angular_cells = angular_cells;
  spec.angular_nodes = angular_nodes;
  return spec;
}

PolarGridSpec ball_spec(int d, double radius, int radial_panels,
                        int radial_nodes, int angular_cells,
                        int angular_nodes) {
  if (!(radius > 0.0) || radial_panels < 1)
    throw ValidationError("ball_spec: invalid radius");
  Vec edges(radial_panels + 1);
  for (int i = 0; i <= radial_panels; ++i)
    edges[i] = radius * i / radial_panels;
  edges.back() = radius;
  PolarGridSpec spec;
  spec.domain = PolarDomain::ball;
  spec.d = d;
  spec.radial_edges = std::move(edges);
  spec.radial_nodes = radial_nodes;
  spec.angular_cells = angular_cells;
  spec.angular_nodes = angular_nodes;
  return spec;
}

}  // namespace hyperbolax
