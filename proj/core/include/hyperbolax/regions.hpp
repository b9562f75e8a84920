#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "hyperbolax/constants.hpp"
#include "hyperbolax/dyadic.hpp"
#include "hyperbolax/geometry.hpp"

// Dyadic decomposition of the restricted annuli A_N into caps (r <= 1) and
// sectors (r > 1). A region at shell N and scale r is indexed by a radial
// layer j and an angular cube k of the base cube C1 in R^{d-1}; all lattice
// arithmetic is exact integer work on those indices.
//
// Operationally A_N is the annular band N/2 <= |xi| <= 2N intersected with
// the lifted cone over C1; this is the set the layer formula tiles exactly,
// for N = 1 as well.

namespace hyperbolax {

constexpr int kMaxLatticeDim = 4;

struct LatticeConfig {
  int d;
  double ell;
  double eps1;

  explicit LatticeConfig(int d_ = 3, double ell_ = constants().ell,
                         double eps1_ = constants().eps1)
      : d(d_), ell(ell_), eps1(eps1_) {
    if (d < 2 || d > kMaxLatticeDim)
      throw ValidationError("LatticeConfig: supported dimensions are 2..4");
    if (!(ell > 0.0 && ell < 0.25))
      throw ValidationError("LatticeConfig: ell must lie in (0, 1/4)");
  }
};

struct RegionId {
  Dyadic N;  // shell, N >= 1
  Dyadic r;  // scale, r <= N
  std::int32_t j = 0;
  std::array<std::int32_t, kMaxLatticeDim - 1> k{};  // first d-1 entries used

  friend bool operator==(const RegionId& a, const RegionId& b) {
    return a.N == b.N && a.r == b.r && a.j == b.j && a.k == b.k;
  }
  friend bool operator<(const RegionId& a, const RegionId& b) {
    if (a.N != b.N) return a.N < b.N;
    if (a.r != b.r) return a.r < b.r;
    if (a.j != b.j) return a.j < b.j;
    return a.k < b.k;
  }
};

struct DyadicCube {
  Vec lo, hi;  // bounds in eta coordinates, subset of [-ell, ell]^{d-1}
  Vec center() const {
    Vec c(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }
};

enum class RegionKind { cap, sector };

struct Region {
  RegionId id;
  RegionKind kind;
  double radial_lo, radial_hi;
  DyadicCube cube;
  Vec center;  // c(kappa) in R^d
};

struct SumsetBox {
  Vec gamma0;             // c(kappa) + c(kappa')
  double radial_half;     // along gamma0, units already applied
  double angular_half;    // sqrt(|s||g| - s.g) bound
  double vertical_lo;     // band for <xi> + <xi'> - <xi+xi'>_2
  double vertical_hi;
};

// Index-level helpers.
int layer_count(Dyadic r);
std::int64_t cubes_per_axis(Dyadic N, Dyadic r);
std::uint64_t region_count(const LatticeConfig& cfg, Dyadic N, Dyadic r);

Region make_region(const LatticeConfig& cfg, const RegionId& id);
Vec region_center(const LatticeConfig& cfg, const RegionId& id);

std::vector<RegionId> enumerate_regions(const LatticeConfig& cfg, Dyadic N,
                                        Dyadic r);

// Closure membership; the origin lies in no region.
bool region_contains(const LatticeConfig& cfg, const Region& reg, const Vec& xi);

// Unique region assignment: boundary points (a null set) go to the
// lexicographically smallest containing region.
std::optional<RegionId> locate(const LatticeConfig& cfg, Dyadic N, Dyadic r,
                               const Vec& xi);

RegionId parent(const LatticeConfig& cfg, const RegionId& id);
std::vector<RegionId> children(const LatticeConfig& cfg, const RegionId& id);
RegionId ancestor(const LatticeConfig& cfg, const RegionId& id, int gen);
std::vector<RegionId> descendants(const LatticeConfig& cfg, const RegionId& id,
                                  int gens);

bool adjacent(const LatticeConfig& cfg, const RegionId& a, const RegionId& b);

// kappa ~ kappa': ancestors through generation d-1 pairwise non-adjacent,
// d-th generation ancestors adjacent. Requires r <= N / 2^d.
bool separated(const LatticeConfig& cfg, const RegionId& a, const RegionId& b);

std::vector<RegionId> separated_partners(const LatticeConfig& cfg,
                                         const RegionId& id);
std::vector<RegionId> separated_partners_brute(const LatticeConfig& cfg,
                                               const RegionId& id);

struct WhitneyTriple {
  Dyadic r;
  RegionId first, second;  // ordered pair, first ~ second
};

// The unique triple covering an off-diagonal pair, found by descending the
// genealogy until the containing regions first become non-adjacent.
std::optional<WhitneyTriple> whitney_cover_triple(const LatticeConfig& cfg,
                                                  Dyadic N, const Vec& xi,
                                                  const Vec& eta);

// All ordered triples with scale r_min <= r <= N, grouped by covering
// ancestor pair. Throws if the list would exceed max_triples; deep lattices
// should use whitney_cover_triple per pair or whitney_triple_count instead.
std::vector<WhitneyTriple> whitney_triples(const LatticeConfig& cfg, Dyadic N,
                                           Dyadic r_min,
                                           std::uint64_t max_triples = 1u
                                                                       << 22);

std::uint64_t whitney_triple_count(const LatticeConfig& cfg, Dyadic N,
                                   Dyadic r_min);

double solid_angle(const LatticeConfig& cfg, const DyadicCube& cube,
                   double rel_tol);
double region_volume(const LatticeConfig& cfg, const Region& reg,
                     double rel_tol);

SumsetBox sumset_box(const LatticeConfig& cfg, const RegionId& a,
                     const RegionId& b);
bool sumset_box_contains(const SumsetBox& box, const Vec& xi, const Vec& xi2);

// Line-delimited dump, format documented in the header comment it writes.
void dump_regions(std::ostream& os, const LatticeConfig& cfg, Dyadic N,
                  Dyadic r);

}  // namespace hyperbolax
