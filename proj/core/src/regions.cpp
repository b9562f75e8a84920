#include "hyperbolax/regions.hpp"

#include <algorithm>
#include <cmath>

#include "hyperbolax/numeric.hpp"

namespace hyperbolax {

namespace {

void require_shell(Dyadic N) {
  if (N.e < 0) throw ValidationError("regions: shell N must satisfy N >= 1");
}

void require_scale(Dyadic N, Dyadic r) {
  require_shell(N);
  if (r.e > N.e) throw ValidationError("regions: scale r must satisfy r <= N");
}

// Radial bounds of layer j at shell N, scale r. Sectors span the full band.
void layer_bounds(Dyadic N, Dyadic r, int j, double* lo, double* hi) {
  const double halfN = 0.5 * N.value();
  if (r.e > 0) {
    *lo = halfN;
    *hi = 4.0 * halfN;
    return;
  }
  const double rv = r.value();
  *lo = halfN * (1.0 + 3.0 * j * rv);
  *hi = halfN * (1.0 + 3.0 * (j + 1) * rv);
}

}  // namespace

int layer_count(Dyadic r) {
  if (r.e >= 0) return 1;
  if (-r.e > 28) throw ValidationError("regions: scale too fine for the index lattice");
  return 1 << (-r.e);
}

std::int64_t cubes_per_axis(Dyadic N, Dyadic r) {
  require_scale(N, r);
  if (N.e - r.e > 34)
    throw ValidationError("regions: scale too fine for the index lattice");
  return std::int64_t(1) << (N.e - r.e);
}

std::uint64_t region_count(const LatticeConfig& cfg, Dyadic N, Dyadic r) {
  const std::uint64_t per_axis = std::uint64_t(cubes_per_axis(N, r));
  std::uint64_t total = std::uint64_t(layer_count(r));
  for (int i = 0; i < cfg.d - 1; ++i) {
    if (total > UINT64_MAX / per_axis)
      throw ValidationError("region_count: overflow");
    total *= per_axis;
  }
  return total;
}

Region make_region(const LatticeConfig& cfg, const RegionId& id) {
  require_scale(id.N, id.r);
  const int layers = layer_count(id.r);
  if (id.j < 0 || id.j >= layers)
    throw ValidationError("make_region: layer index out of range");
  const std::int64_t per_axis = cubes_per_axis(id.N, id.r);
  for (int i = 0; i < cfg.d - 1; ++i)
    if (id.k[i] < 0 || id.k[i] >= per_axis)
      throw ValidationError("make_region: cube index out of range");
  for (int i = cfg.d - 1; i < kMaxLatticeDim - 1; ++i)
    if (id.k[i] != 0)
      throw ValidationError("make_region: unused cube index must be zero");

  Region reg;
  reg.id = id;
  reg.kind = id.r.e > 0 ? RegionKind::sector : RegionKind::cap;
  layer_bounds(id.N, id.r, id.j, &reg.radial_lo, &reg.radial_hi);

  const double width = 2.0 * cfg.ell / double(per_axis);
  reg.cube.lo.resize(cfg.d - 1);
  reg.cube.hi.resize(cfg.d - 1);
  for (int i = 0; i < cfg.d - 1; ++i) {
    reg.cube.lo[i] = -cfg.ell + id.k[i] * width;
    reg.cube.hi[i] = reg.cube.lo[i] + width;
  }

  // c(kappa) = (N/2)(1 + 3 min(1,r)(j + 1/2)) omega*, omega the cube center.
  const double rmin1 = std::min(1.0, id.r.value());
  const double rho_c = 0.5 * id.N.value() * (1.0 + 3.0 * rmin1 * (id.j + 0.5));
  Vec omega = reg.cube.center();
  reg.center.resize(cfg.d);
  for (int i = 0; i < cfg.d - 1; ++i) reg.center[i] = rho_c * omega[i];
  reg.center[cfg.d - 1] = rho_c * std::sqrt(1.0 - norm2sq(omega));
  return reg;
}

Vec region_center(const LatticeConfig& cfg, const RegionId& id) {
  return make_region(cfg, id).center;
}

std::vector<RegionId> enumerate_regions(const LatticeConfig& cfg, Dyadic N,
                                        Dyadic r) {
  const std::uint64_t total = region_count(cfg, N, r);
  if (total > (std::uint64_t(1) << 24))
    throw ValidationError(
        "enumerate_regions: lattice too large to materialize; use region_count");
  const std::int64_t per_axis = cubes_per_axis(N, r);
  const int layers = layer_count(r);
  std::vector<RegionId> out;
  out.reserve(total);
  RegionId id;
  id.N = N;
  id.r = r;
  std::array<std::int32_t, kMaxLatticeDim - 1> k{};
  for (int j = 0; j < layers; ++j) {
    k.fill(0);
    while (true) {
      id.j = j;
      id.k = k;
      out.push_back(id);
      int axis = cfg.d - 2;
      while (axis >= 0 && ++k[axis] == per_axis) k[axis--] = 0;
      if (axis < 0) break;
    }
  }
  return out;
}

bool region_contains(const LatticeConfig& cfg, const Region& reg, const Vec& xi) {
  if (static_cast<int>(xi.size()) != cfg.d)
    throw ValidationError("region_contains: dimension mismatch");
  const double rho = norm2(xi);
  if (rho == 0.0) return false;  // the origin lies in no region
  if (rho < reg.radial_lo || rho > reg.radial_hi) return false;
  if (xi[cfg.d - 1] <= 0.0) return false;
  for (int i = 0; i < cfg.d - 1; ++i) {
    const double eta = xi[i] / rho;
    if (eta < reg.cube.lo[i] || eta > reg.cube.hi[i]) return false;
  }
  return true;
}

namespace {

// Cell index along one axis with closed-interval boundary resolution: points
// exactly on a shared face go to the smaller index.
std::int64_t cell_index(double t, std::int64_t count) {
  if (t < 0.0 || t > double(count)) return -1;
  double fl = std::floor(t);
  std::int64_t m = std::int64_t(fl);
  if (fl == t && m > 0) --m;
  if (m >= count) m = count - 1;
  return m;
}

}  // namespace

std::optional<RegionId> locate(const LatticeConfig& cfg, Dyadic N, Dyadic r,
                               const Vec& xi) {
  require_scale(N, r);
  if (static_cast<int>(xi.size()) != cfg.d)
    throw ValidationError("locate: dimension mismatch");
  const double rho = norm2(xi);
  if (rho == 0.0) return std::nullopt;
  const double halfN = 0.5 * N.value();
  if (rho < halfN || rho > 4.0 * halfN) return std::nullopt;
  if (xi[cfg.d - 1] <= 0.0) return std::nullopt;

  RegionId id;
  id.N = N;
  id.r = r;
  if (r.e > 0) {
    id.j = 0;
  } else {
    const double t = (rho / halfN - 1.0) / (3.0 * r.value());
    std::int64_t j = cell_index(t, layer_count(r));
    if (j < 0) return std::nullopt;
    id.j = std::int32_t(j);
  }
  const std::int64_t per_axis = cubes_per_axis(N, r);
  const double width = 2.0 * cfg.ell / double(per_axis);
  for (int i = 0; i < cfg.d - 1; ++i) {
    const double eta = xi[i] / rho;
    std::int64_t m = cell_index((eta + cfg.ell) / width, per_axis);
    if (m < 0) return std::nullopt;
    id.k[i] = std::int32_t(m);
  }
  return id;
}

RegionId ancestor(const LatticeConfig& cfg, const RegionId& id, int gen) {
  if (gen < 0) throw ValidationError("ancestor: generation must be >= 0");
  if (id.r.e + gen > id.N.e)
    throw ValidationError("ancestor: generation exceeds lattice top");
  RegionId anc = id;
  anc.r = Dyadic{id.r.e + gen};
  anc.j = id.j >> gen;
  for (int i = 0; i < cfg.d - 1; ++i) anc.k[i] = id.k[i] >> gen;
  return anc;
}

RegionId parent(const LatticeConfig& cfg, const RegionId& id) {
  if (id.r == id.N)
    throw ValidationError("parent: region at top scale r = N has no parent");
  return ancestor(cfg, id, 1);
}

std::vector<RegionId> children(const LatticeConfig& cfg, const RegionId& id) {
  require_scale(id.N, id.r);
  const Dyadic rc{id.r.e - 1};
  // Caps split radially as well as angularly; sectors only angularly.
  std::vector<std::int32_t> js =
      id.r.e <= 0 ? std::vector<std::int32_t>{2 * id.j, 2 * id.j + 1}
                  : std::vector<std::int32_t>{0};
  std::vector<RegionId> out;
  out.reserve(js.size() << (cfg.d - 1));
  for (std::int32_t j : js) {
    for (int bits = 0; bits < (1 << (cfg.d - 1)); ++bits) {
      RegionId c;
      c.N = id.N;
      c.r = rc;
      c.j = j;
      for (int i = 0; i < cfg.d - 1; ++i)
        c.k[i] = 2 * id.k[i] + ((bits >> i) & 1);
      out.push_back(c);
    }
  }
  return out;
}

namespace {

bool adjacent_at_gen(const LatticeConfig& cfg, const RegionId& a,
                     const RegionId& b, int gen) {
  if (std::abs((a.j >> gen) - (b.j >> gen)) > 1) return false;
  for (int i = 0; i < cfg.d - 1; ++i)
    if (std::abs((a.k[i] >> gen) - (b.k[i] >> gen)) > 1) return false;
  return true;
}

}  // namespace

bool adjacent(const LatticeConfig& cfg, const RegionId& a, const RegionId& b) {
  if (a.N != b.N || a.r != b.r)
    throw ValidationError("adjacent: regions must share shell and scale");
  return adjacent_at_gen(cfg, a, b, 0);
}

bool separated(const LatticeConfig& cfg, const RegionId& a, const RegionId& b) {
  if (a.N != b.N || a.r != b.r)
    throw ValidationError("separated: regions must share shell and scale");
  if (a.r.e + cfg.d > a.N.e)
    throw ValidationError(
        "separated: requires r <= N / 2^d so ancestors to generation d exist");
  for (int g = cfg.d - 1; g >= 0; --g)
    if (adjacent_at_gen(cfg, a, b, g)) return false;
  return adjacent_at_gen(cfg, a, b, cfg.d);
}

std::vector<RegionId> separated_partners(const LatticeConfig& cfg,
                                         const RegionId& id) {
  require_scale(id.N, id.r);
  if (id.r.e + cfg.d > id.N.e)
    throw ValidationError("separated_partners: requires r <= N / 2^d");
  const int d = cfg.d;
  const std::int64_t per_axis = cubes_per_axis(id.N, id.r);
  const int layers = layer_count(id.r);
  const std::int64_t block = std::int64_t(1) << d;

  auto window = [&](std::int32_t idx, std::int64_t count, std::int64_t* lo,
                    std::int64_t* hi) {
    const std::int64_t anc = idx >> d;
    *lo = std::max<std::int64_t>(0, (anc - 1) * block);
    *hi = std::min<std::int64_t>(count - 1, (anc + 2) * block - 1);
  };

  std::int64_t jlo, jhi;
  window(id.j, layers, &jlo, &jhi);
  std::array<std::int64_t, kMaxLatticeDim - 1> klo{}, khi{};
  for (int i = 0; i < d - 1; ++i) window(id.k[i], per_axis, &klo[i], &khi[i]);

  std::vector<RegionId> out;
  RegionId cand;
  cand.N = id.N;
  cand.r = id.r;
  for (std::int64_t j = jlo; j <= jhi; ++j) {
    cand.j = std::int32_t(j);
    std::array<std::int64_t, kMaxLatticeDim - 1> k{};
    for (int i = 0; i < d - 1; ++i) k[i] = klo[i];
    while (true) {
      for (int i = 0; i < d - 1; ++i) cand.k[i] = std::int32_t(k[i]);
      bool ok = true;
      for (int g = d - 1; g >= 0 && ok; --g)
        if (adjacent_at_gen(cfg, id, cand, g)) ok = false;
      if (ok && adjacent_at_gen(cfg, id, cand, d)) out.push_back(cand);
      int axis = d - 2;
      while (axis >= 0 && ++k[axis] > khi[axis]) k[axis] = klo[axis], --axis;
      if (axis < 0) break;
    }
  }
  return out;
}

std::vector<RegionId> separated_partners_brute(const LatticeConfig& cfg,
                                               const RegionId& id) {
  std::vector<RegionId> out;
  for (const RegionId& cand : enumerate_regions(cfg, id.N, id.r))
    if (separated(cfg, id, cand)) out.push_back(cand);
  return out;
}

std::optional<WhitneyTriple> whitney_cover_triple(const LatticeConfig& cfg,
                                                  Dyadic N, const Vec& xi,
                                                  const Vec& eta) {
  require_shell(N);
  constexpr int kFloorExp = -25;  // int32 layer indices bound the descent
  // Find the largest scale at which the containing regions are non-adjacent.
  for (int e = N.e; e >= kFloorExp; --e) {
    const Dyadic r{e};
    auto a = locate(cfg, N, r, xi);
    auto b = locate(cfg, N, r, eta);
    if (!a || !b) return std::nullopt;
    if (!adjacent(cfg, *a, *b)) {
      const Dyadic rc{e - (cfg.d - 1)};
      auto ka = locate(cfg, N, rc, xi);
      auto kb = locate(cfg, N, rc, eta);
      if (!ka || !kb || !separated(cfg, *ka, *kb)) return std::nullopt;
      return WhitneyTriple{rc, *ka, *kb};
    }
  }
  return std::nullopt;  // pair too close to the diagonal to resolve
}

std::vector<RegionId> descendants(const LatticeConfig& cfg, const RegionId& id,
                                  int gens) {
  if (gens < 0) throw ValidationError("descendants: gens must be >= 0");
  std::vector<RegionId> out{id};
  for (int g = 0; g < gens; ++g) {
    std::vector<RegionId> next;
    next.reserve(out.size() << cfg.d);
    for (const RegionId& reg : out)
      for (const RegionId& kid : children(cfg, reg)) next.push_back(kid);
    out = std::move(next);
  }
  return out;
}

namespace {

// Separated pairs at scale r are exactly the descendant pairs of cells at
// scale s = r 2^{d-1} that are non-adjacent while their parents are
// adjacent: non-adjacency at the coarsest required generation propagates to
// all finer ones. Visits qualifying ordered cell pairs per scale.
template <class Fn>
void walk_covering_cells(const LatticeConfig& cfg, Dyadic N, Dyadic r_min,
                         Fn&& fn) {
  require_scale(N, r_min);
  for (int e = N.e - cfg.d; e >= r_min.e; --e) {
    const Dyadic s{e + cfg.d - 1};
    if (region_count(cfg, N, s) > (std::uint64_t(1) << 13))
      throw ValidationError(
          "whitney triples: lattice too fine to scan; query pairs with "
          "whitney_cover_triple instead");
    auto cells = enumerate_regions(cfg, N, s);
    for (const RegionId& a : cells)
      for (const RegionId& b : cells) {
        if (adjacent_at_gen(cfg, a, b, 0)) continue;
        if (!adjacent_at_gen(cfg, a, b, 1)) continue;
        fn(Dyadic{e}, a, b);
      }
  }
}

// Descendant count over `gens` halvings starting from scale exponent e.
std::uint64_t descendant_multiplicity(const LatticeConfig& cfg, int e,
                                      int gens) {
  std::uint64_t mult = 1;
  for (int g = 0; g < gens; ++g)
    mult <<= (e - g <= 0 ? cfg.d : cfg.d - 1);
  return mult;
}

}  // namespace

std::vector<WhitneyTriple> whitney_triples(const LatticeConfig& cfg, Dyadic N,
                                           Dyadic r_min,
                                           std::uint64_t max_triples) {
  std::vector<WhitneyTriple> out;
  walk_covering_cells(
      cfg, N, r_min, [&](Dyadic r, const RegionId& a, const RegionId& b) {
        auto da = descendants(cfg, a, cfg.d - 1);
        auto db = descendants(cfg, b, cfg.d - 1);
        if (out.size() + da.size() * db.size() > max_triples)
          throw ValidationError(
              "whitney triples: list exceeds max_triples; use "
              "whitney_triple_count or per-pair queries");
        for (const RegionId& x : da)
          for (const RegionId& y : db) out.push_back(WhitneyTriple{r, x, y});
      });
  return out;
}

std::uint64_t whitney_triple_count(const LatticeConfig& cfg, Dyadic N,
                                   Dyadic r_min) {
  std::uint64_t total = 0;
  walk_covering_cells(cfg, N, r_min,
                      [&](Dyadic r, const RegionId&, const RegionId&) {
                        const std::uint64_t mult = descendant_multiplicity(
                            cfg, r.e + cfg.d - 1, cfg.d - 1);
                        total += mult * mult;
                      });
  return total;
}

double solid_angle(const LatticeConfig&, const DyadicCube& cube,
                   double rel_tol) {
  return integrate_box_adaptive(
      [](const Vec& eta) { return 1.0 / std::sqrt(1.0 - norm2sq(eta)); },
      cube.lo, cube.hi, rel_tol);
}

double region_volume(const LatticeConfig& cfg, const Region& reg,
                     double rel_tol) {
  const double d = cfg.d;
  const double radial =
      (std::pow(reg.radial_hi, d) - std::pow(reg.radial_lo, d)) / d;
  return radial * solid_angle(cfg, reg.cube, rel_tol);
}

SumsetBox sumset_box(const LatticeConfig& cfg, const RegionId& a,
                     const RegionId& b) {
  if (!separated(cfg, a, b))
    throw ValidationError("sumset_box: regions must be separated");
  const Constants& c = constants();
  const double N = a.N.value(), r = a.r.value();
  SumsetBox box;
  box.gamma0 = region_center(cfg, a) + region_center(cfg, b);
  box.radial_half = c.sumset_radial_hi * std::min(1.0, r) * N;
  box.angular_half = c.sumset_angular_hi * r;
  box.vertical_lo = c.sumset_vertical_lo * r * r / N;
  box.vertical_hi = c.sumset_vertical_hi * r * r / N;
  return box;
}

bool sumset_box_contains(const SumsetBox& box, const Vec& xi, const Vec& xi2) {
  const Vec s = xi + xi2;
  const double slen = norm2(s), glen = norm2(box.gamma0);
  if (std::abs(slen - glen) > box.radial_half) return false;
  const double transverse2 = slen * glen - dot(s, box.gamma0);
  if (transverse2 > box.angular_half * box.angular_half * (1.0 + 1e-12))
    return false;
  const double vertical =
      bracket(xi) + bracket(xi2) - std::sqrt(4.0 + slen * slen);
  return vertical >= box.vertical_lo && vertical <= box.vertical_hi;
}

void dump_regions(std::ostream& os, const LatticeConfig& cfg, Dyadic N,
                  Dyadic r) {
  os << "# hyperbolax-regions v1 constants=" << constants().version << "\n";
  os << "# d=" << cfg.d << " N=" << N.str() << " r=" << r.str() << "\n";
  os << "# columns: j";
  for (int i = 0; i < cfg.d - 1; ++i) os << " k" << i;
  for (int i = 0; i < cfg.d; ++i) os << " c" << i;
  os << " radial_lo radial_hi kind\n";
  os.precision(17);
  for (const RegionId& id : enumerate_regions(cfg, N, r)) {
    const Region reg = make_region(cfg, id);
    os << id.j;
    for (int i = 0; i < cfg.d - 1; ++i) os << ' ' << id.k[i];
    for (int i = 0; i < cfg.d; ++i) os << ' ' << reg.center[i];
    os << ' ' << reg.radial_lo << ' ' << reg.radial_hi << ' '
       << (reg.kind == RegionKind::cap ? "cap" : "sector") << "\n";
  }
}

}  // namespace hyperbolax
