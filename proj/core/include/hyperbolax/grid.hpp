#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperbolax/common.hpp"
#include "hyperbolax/dyadic.hpp"
#include "hyperbolax/regions.hpp"

// Tensor polar quadrature grids: Gauss-Legendre panels in rho times an
// angular rule. Three domains:
//   patch  - the cone over the base cube C1, parametrized by eta in
//            [-ell, ell]^{d-1} with surface density (1-|eta|^2)^{-1/2};
//            angular cells are dyadic subcubes, so region boundaries at the
//            matching depth fall on cell edges.
//   sphere - the full annulus rho_min <= |xi| <= rho_max; d = 2 uses a
//            periodic phi axis, d = 3 adds an equal-area z = cos(theta)
//            axis, d = 4 a further polar angle with sin^2 weight.
//   ball   - sphere domain with rho from 0.

namespace hyperbolax {

struct AxisQuad {
  Vec nodes, weights;
  bool periodic = false;
  double lo = 0.0, hi = 0.0;  // domain covered by the rule
  // Coordinate degenerates at an endpoint (sphere pole): all later axes
  // collapse there, and interpolation blends toward the ring mean.
  bool pole_lo = false, pole_hi = false;
};

// Gauss-Legendre rule with nodes_per_panel nodes on each [edges[i], edges[i+1]].
AxisQuad gl_panel_axis(const Vec& edges, int nodes_per_panel);
// Midpoint rule on [0, period), exact for trigonometric polynomials.
AxisQuad periodic_axis(double period, int n);

enum class PolarDomain { patch, sphere, ball };

struct PolarGridSpec {
  PolarDomain domain = PolarDomain::sphere;
  int d = 3;
  Vec radial_edges;       // strictly increasing; 0 first edge only for ball
  int radial_nodes = 6;   // GL nodes per radial panel
  int angular_cells = 4;  // panels per non-periodic angular axis
  int angular_nodes = 4;  // GL nodes per angular panel
  int phi_nodes = 0;      // periodic axis size; 0 picks a default
  double ell = 0.0;       // patch half-width; 0 picks constants().ell

  std::string str() const;
  static PolarGridSpec parse(const std::string& line);
  friend bool operator==(const PolarGridSpec&, const PolarGridSpec&) = default;
};

class PolarGrid {
 public:
  explicit PolarGrid(PolarGridSpec spec);

  const PolarGridSpec& spec() const { return spec_; }
  int dim() const { return spec_.d; }
  PolarDomain domain() const { return spec_.domain; }

  std::size_t n_radial() const { return radial_.nodes.size(); }
  std::size_t n_angular() const { return n_angular_; }
  std::size_t size() const { return n_radial() * n_angular_; }

  double rho(std::size_t ir) const { return radial_.nodes[ir]; }
  // Weight rho^{d-1} drho, surface measure already included below.
  double radial_weight(std::size_t ir) const { return radial_w_[ir]; }
  const Vec& direction(std::size_t ia) const { return directions_[ia]; }
  double angular_weight(std::size_t ia) const { return angular_w_[ia]; }

  double rho_min() const { return radial_.lo; }
  double rho_max() const { return radial_.hi; }

  // Node index is ir * n_angular() + ia.
  Vec node(std::size_t idx) const;
  double w_leb(std::size_t idx) const {
    return radial_w_[idx / n_angular_] * angular_w_[idx % n_angular_];
  }
  double w_sigma(std::size_t idx) const {
    return w_leb(idx) / bracket_[idx / n_angular_];
  }
  double node_bracket(std::size_t idx) const {
    return bracket_[idx / n_angular_];
  }

  // Piecewise-multilinear interpolation in the grid's own coordinates;
  // points outside the covered domain evaluate to zero and bump *outside.
  cplx interpolate(const std::vector<cplx>& values, const Vec& xi,
                   std::uint64_t* outside = nullptr) const;

 private:
  PolarGridSpec spec_;
  AxisQuad radial_;
  Vec radial_w_;   // rho^{d-1} times panel weight
  Vec bracket_;    // <rho> per radial node
  std::vector<AxisQuad> angular_axes_;
  std::size_t n_angular_ = 0;
  std::vector<Vec> directions_;
  Vec angular_w_;

  bool angular_coords(const Vec& xi, double rho, Vec* coords) const;
};

// Radial breakpoints of the shell taper for frequency N: the support
// boundaries and the two taper corners.
Vec taper_edges(double N);

PolarGridSpec patch_spec(const LatticeConfig& cfg, Dyadic N, Dyadic r_align,
                         int radial_nodes, int angular_cells,
                         int angular_nodes);
PolarGridSpec sphere_spec(int d, double rho_min, double rho_max,
                          int radial_panels, int radial_nodes,
                          int angular_cells, int angular_nodes);
PolarGridSpec ball_spec(int d, double radius, int radial_panels,
                        int radial_nodes, int angular_cells,
                        int angular_nodes);

}  // namespace hyperbolax
