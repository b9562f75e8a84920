#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hyperbolax/common.hpp"
#include "hyperbolax/function.hpp"

// Space-time evaluation of the wave T(f)(x,t) = sum f(xi) w_sigma(xi)
// e^{i(x.xi + t<xi>)} over the sampling nodes of f, plus the norms taken of
// it. The batched path removes a carrier frequency, spreads the quadrature
// sources onto a fine lattice per radial shell, and runs one FFT per shell;
// the time phase is applied exactly afterwards. A naive per-node reference
// path and a symbolic adaptive-quadrature oracle stay available for checks.

namespace hyperbolax {

// Uniform tensor lattice with odd counts per axis, so the origin is a node
// and the extreme nodes sit exactly at +-R. Weights are the uniform cell
// volume; the integrands vanish at the box edge, so end corrections are
// below the truncation error already being reported.
struct SpacetimeGrid {
  double R_x = 40.0;
  double R_t = 40.0;
  std::vector<int> n_x;  // nodes per spatial axis, each odd
  int n_t = 1;           // odd

  int dim() const { return int(n_x.size()); }
  double dx(int axis) const {
    return n_x[axis] > 1 ? 2.0 * R_x / (n_x[axis] - 1) : 2.0 * R_x;
  }
  double dt() const { return n_t > 1 ? 2.0 * R_t / (n_t - 1) : 2.0 * R_t; }
  double x_node(int axis, int j) const {
    return (j - (n_x[axis] - 1) / 2) * dx(axis);
  }
  double t_node(int j) const { return (j - (n_t - 1) / 2) * dt(); }
  std::size_t n_spatial() const;
  std::size_t size() const { return n_spatial() * std::size_t(n_t); }
  double cell_volume() const;
  void validate() const;

  std::string str() const;
  static SpacetimeGrid parse(const std::string& line);
  friend bool operator==(const SpacetimeGrid&, const SpacetimeGrid&) = default;
};

struct TruncationReport {
  double kept_mass = 0.0;     // sum |f| w_sigma over all nonzero sources;
                              // equals T(|f|)(0,0) and bounds |T(f)| globally
  double dropped_mass = 0.0;  // same sum over sources below the stats cut;
                              // always zero for extend(), which keeps every
                              // nonzero source so the operator stays linear
  double tail_norm = 0.0;     // dispersive-decay estimate beyond R_t for the
                              // last Lp norm computed from this field
  double edge_ratio = 0.0;    // max |field| on the spatial boundary / max |field|
  bool unreliable = false;    // tail_norm exceeded 10% of the truncated norm
};

// Node layout: values[it * n_spatial + is], last spatial axis fastest.
// values holds W = e^{-i(x.carrier_xi + t carrier_omega)} T(f); the carrier
// is the mass-weighted mean frequency, so |W| = |T| while W itself varies on
// envelope scales only.
struct ExtensionField {
  SpacetimeGrid grid;
  Vec carrier_xi;
  double carrier_omega = 1.0;
  std::vector<cplx> values;
  TruncationReport report;

  std::size_t index(const std::vector<int>& jx, int jt) const;
  Vec node_x(std::size_t idx) const;
  double node_t(std::size_t idx) const;
  // T(f) at the node, carrier phase restored.
  cplx value(std::size_t idx) const;
};

struct ExtendOptions {
  bool precise = false;  // wider spreading window, higher oversampling
  std::optional<Vec> carrier_xi;
  std::optional<double> carrier_omega;
};

// Thresholded summary of the quadrature sources of f: peak, kept/dropped
// mass, carrier (|f|^2-weighted mean of xi and <xi>), and the carrier-centred
// per-axis bandwidth that the Nyquist guard checks grids against.
struct SourceStats {
  double peak = 0.0;
  double kept_mass = 0.0;
  double dropped_mass = 0.0;
  std::size_t kept = 0;
  Vec carrier_xi;
  double carrier_omega = 1.0;
  Vec bandwidth;           // per spatial axis, never below 0.5
  double omega_band = 0.25;
};

SourceStats analyze_sources(const SampledFunction& f, double source_cut = 0.0);

// R_x = R_t = 40 for unit-scale inputs; wide-band inputs (boosted families)
// scale the radii down in proportion so the node budget stays flat, with the
// truncation made visible by the tail estimate rather than hidden. Counts
// come from the bandwidth at 1.15x oversampling.
SpacetimeGrid default_spacetime_grid(const SampledFunction& f);

ExtensionField extend(const SampledFunction& f, const SpacetimeGrid& grid,
                      const ExtendOptions& opts = {});
// Reference path: same sources, carrier and guards, evaluated by the naive
// per-source loop. Cost nnz * grid.size(); small grids only.
ExtensionField extend_direct(const SampledFunction& f,
                             const SpacetimeGrid& grid,
                             const ExtendOptions& opts = {});
// Quadrature oracle on the symbolic function, independent of any sampling
// grid: product rules under resolution doubling, converged when the step
// change drops below rel_tol times the mass integral of |f|. d = 2 or 3.
cplx extend_oracle(const SymbolicFunction& f, const Vec& x, double t,
                   double rel_tol = 1e-9);

// Quadrature weights of the box integrals (composite Simpson product),
// flattened in field node order. The adjoint pairing must use exactly these
// for <extend(f), F>_box = <f, adjoint(F)>_{L2(H)} to hold on the grid.
std::vector<double> spacetime_weights(const SpacetimeGrid& g);

// Truncated-box quadrature norm. Records the stationary-phase tail estimate
// (|T| ~ (1+|t|)^{-d/2}) and the boundary diagnostics in F.report.
double norm_Lp_spacetime(ExtensionField& F, double p);
// L^r in x per time slice, then L^q in t. q may be infinity.
double mixed_norm(const ExtensionField& F, double q, double r);
// ||F G||_{L^e} on the common grid; requires e > 1.
double bilinear_norm(const ExtensionField& F, const ExtensionField& G,
                     double e);

struct DeviationReport {
  double max_abs = 0.0;
  double max_rel = 0.0;  // max_abs / scale
  double scale = 0.0;    // max |reference| over the compared nodes
  std::size_t nodes = 0;
};

// Batched extend against the direct (d+1)-dimensional transform of the
// measure-weighted samples - the same sum reorganized, so deviations measure
// the batched path's spreading error.
DeviationReport fourier_transform_check(const SampledFunction& f,
                                        const SpacetimeGrid& grid);
// Batched extend against (2pi)^d e^{it sqrt(1-Laplace)} g with g^ = f/<xi>,
// evaluated spectrally from the same nodes through the Lebesgue weights.
DeviationReport kg_propagator_check(const SampledFunction& f,
                                    const SpacetimeGrid& grid);

// norm_Lp_spacetime(extend(f, grid), p) / norm_L2_hyperboloid(f).
double rayleigh(const SampledFunction& f, double p, const SpacetimeGrid& grid);
double rayleigh(const SampledFunction& f, double p);  // default grid

// CSV export: one row per node, coordinates then Re/Im of T.
void save_field_csv(std::ostream& os, const ExtensionField& F);

// Polar sampling spec whose quadrature resolves e^{i(x.xi + t<xi>)} over the
// ball |xi| <= rho_max for |x| <= reach_x, |t| <= reach_t: one global Gauss
// rule per axis, sized by the oscillation frequency (radial sees |x| + |t|,
// angular only |x|). oversample scales the resolved frequency.
PolarGridSpec extension_sampling_spec(int d, double rho_max, double reach_x,
                                      double reach_t, double oversample = 1.0);
// Radius where |f| falls below cut * peak, probed on a deterministic
// direction set. Tighter than support_radius() for rapidly decaying inputs.
double effective_support_radius(const SymbolicFunction& f, double cut = 1e-7);

}  // namespace hyperbolax
