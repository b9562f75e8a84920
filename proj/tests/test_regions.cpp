#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "hyperbolax/regions.hpp"

using namespace hyperbolax;

namespace {

// Independent adjacency oracle: closed radial intervals overlap and closed
// angular cubes overlap, computed from the realized geometry rather than
// index arithmetic.
bool adjacent_geometric(const LatticeConfig& cfg, const RegionId& a,
                        const RegionId& b) {
  Region ra = make_region(cfg, a);
  Region rb = make_region(cfg, b);
  double tol = 1e-12 * ra.radial_hi;
  if (ra.radial_hi < rb.radial_lo - tol || rb.radial_hi < ra.radial_lo - tol)
    return false;
  for (int i = 0; i < cfg.d - 1; ++i) {
    double w = 1e-12 * (ra.cube.hi[i] - ra.cube.lo[i]);
    if (ra.cube.hi[i] < rb.cube.lo[i] - w || rb.cube.hi[i] < ra.cube.lo[i] - w)
      return false;
  }
  return true;
}

Vec sample_point(std::mt19937_64& rng, const LatticeConfig& cfg, Dyadic N) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double lo = 0.5 * N.value(), hi = 2.0 * N.value();
  double rho = lo + (hi - lo) * u(rng);
  Vec eta(cfg.d - 1);
  for (double& c : eta) c = cfg.ell * (2.0 * u(rng) - 1.0);
  double s = std::sqrt(1.0 - norm2sq(eta));
  Vec xi(cfg.d);
  for (int i = 0; i < cfg.d - 1; ++i) xi[i] = rho * eta[i];
  xi[cfg.d - 1] = rho * s;
  return xi;
}

}  // namespace

TEST_CASE("region counts for small configurations") {
  LatticeConfig cfg(3);
  CHECK(region_count(cfg, Dyadic(0), Dyadic(0)) == 1);
  CHECK(region_count(cfg, Dyadic(1), Dyadic(0)) == 4);    // 1 layer, 2x2 cubes
  CHECK(region_count(cfg, Dyadic(0), Dyadic(-1)) == 8);   // 2 layers x 2x2
  CHECK(region_count(cfg, Dyadic(3), Dyadic(-1)) == 2 * 16 * 16);
  CHECK(enumerate_regions(cfg, Dyadic(0), Dyadic(-1)).size() == 8);

  LatticeConfig cfg4(4);
  CHECK(region_count(cfg4, Dyadic(0), Dyadic(0)) == 1);
  CHECK(region_count(cfg4, Dyadic(1), Dyadic(0)) == 8);   // 2x2x2 cubes
}

TEST_CASE("coarsest region spans the whole band") {
  LatticeConfig cfg(3);
  Region r = make_region(cfg, RegionId{Dyadic(0), Dyadic(0), 0, {0, 0, 0}});
  CHECK(r.kind == RegionKind::cap);
  CHECK(r.radial_lo == doctest::Approx(0.5));
  CHECK(r.radial_hi == doctest::Approx(2.0));
  CHECK(r.cube.lo[0] == doctest::Approx(-cfg.ell));
  CHECK(r.cube.hi[1] == doctest::Approx(cfg.ell));
  // Center sits at radius 5/4 above the cube midpoint.
  CHECK(r.center[2] == doctest::Approx(1.25));
  CHECK(r.center[0] == doctest::Approx(0.0));
  CHECK(region_contains(cfg, r, r.center));
}

TEST_CASE("sector layers cover the full band at coarse scales") {
  LatticeConfig cfg(3);
  for (auto id : enumerate_regions(cfg, Dyadic(2), Dyadic(1))) {
    Region r = make_region(cfg, id);
    CHECK(r.kind == RegionKind::sector);
    CHECK(r.radial_lo == doctest::Approx(2.0));
    CHECK(r.radial_hi == doctest::Approx(8.0));
  }
}

TEST_CASE("locate inverts containment on random band points") {
  LatticeConfig cfg(3);
  std::mt19937_64 rng(23);
  for (auto [Ne, re] : {std::pair{0, 0}, {0, -2}, {2, 1}, {3, -2}}) {
    Dyadic N(Ne), r(re);
    for (int trial = 0; trial < 50; ++trial) {
      Vec xi = sample_point(rng, cfg, N);
      auto id = locate(cfg, N, r, xi);
      REQUIRE(id.has_value());
      CHECK(region_contains(cfg, make_region(cfg, *id), xi));
    }
  }
}

TEST_CASE("interior points land in exactly one region") {
  LatticeConfig cfg(3);
  std::mt19937_64 rng(29);
  Dyadic N(0), r(-2);
  auto ids = enumerate_regions(cfg, N, r);
  for (int trial = 0; trial < 30; ++trial) {
    Vec xi = sample_point(rng, cfg, N);
    int hits = 0;
    for (const auto& id : ids)
      if (region_contains(cfg, make_region(cfg, id), xi)) ++hits;
    // Closed regions, so boundary points may land in more than one; random
    // samples are interior almost surely.
    CHECK(hits == 1);
  }
  CHECK_FALSE(region_contains(
      cfg, make_region(cfg, ids[0]), Vec{0.0, 0.0, 0.0}));
  CHECK_FALSE(region_contains(
      cfg, make_region(cfg, ids[0]), Vec{0.0, 0.0, 3.0 * N.value()}));
}

TEST_CASE("shared boundary points lie in both closures and locate picks one") {
  LatticeConfig cfg(3);
  Dyadic N(0), r(-1);
  // Radial boundary between layers 0 and 1: rho = (1/2)(1 + 3/2).
  double rho = 0.5 * (1.0 + 3.0 * 0.5);
  Vec xi{0.01, -0.02, 0.0};
  double s = std::sqrt(1.0 - (0.01 * 0.01 + 0.02 * 0.02));
  xi[0] *= rho;
  xi[1] *= rho;
  xi[2] = rho * s;
  int hits = 0;
  for (const auto& id : enumerate_regions(cfg, N, r))
    if (region_contains(cfg, make_region(cfg, id), xi)) ++hits;
  CHECK(hits == 2);
  auto id = locate(cfg, N, r, xi);
  REQUIRE(id.has_value());
  CHECK(id->j == 0);  // ties resolve toward the smaller index
}

TEST_CASE("children partition their parent") {
  LatticeConfig cfg(3);
  std::mt19937_64 rng(31);

  struct Case {
    int Ne, re;
    size_t expect;
  };
  // Sectors refine in angle only until layers appear.
  for (Case c : {Case{2, 2, 4}, Case{2, 1, 4}, Case{2, 0, 8}, Case{0, 0, 8},
                 Case{0, -3, 8}}) {
    Dyadic N(c.Ne), r(c.re);
    RegionId parent_id = *locate(cfg, N, r, sample_point(rng, cfg, N));
    auto kids = children(cfg, parent_id);
    CHECK(kids.size() == c.expect);
    double vol_kids = 0.0;
    Region pr = make_region(cfg, parent_id);
    for (const auto& kid : kids) {
      CHECK(parent(cfg, kid) == parent_id);
      Region kr = make_region(cfg, kid);
      CHECK(kr.radial_lo >= pr.radial_lo - 1e-12);
      CHECK(kr.radial_hi <= pr.radial_hi + 1e-12);
      vol_kids += region_volume(cfg, kr, 1e-11);
    }
    CHECK(vol_kids == doctest::Approx(region_volume(cfg, pr, 1e-11))
                          .epsilon(1e-9));
  }

  LatticeConfig cfg4(4);
  CHECK(children(cfg4, RegionId{Dyadic(2), Dyadic(2), 0, {0, 0, 0}}).size() ==
        8);
  CHECK(children(cfg4, RegionId{Dyadic(0), Dyadic(0), 0, {0, 0, 0}}).size() ==
        16);
}

TEST_CASE("ancestor composes parent and respects genealogy identities") {
  LatticeConfig cfg(3);
  RegionId id{Dyadic(0), Dyadic(-4), 9, {13, 6, 0}};
  CHECK(ancestor(cfg, id, 0) == id);
  CHECK(ancestor(cfg, id, 1) == parent(cfg, id));
  CHECK(ancestor(cfg, id, 2) == parent(cfg, parent(cfg, id)));
  CHECK(ancestor(cfg, id, 4) ==
        RegionId{Dyadic(0), Dyadic(0), 0, {0, 0, 0}});
  CHECK_THROWS_AS(parent(cfg, RegionId{Dyadic(0), Dyadic(0), 0, {0, 0, 0}}),
                  ValidationError);
}

TEST_CASE("index adjacency matches the geometric oracle") {
  LatticeConfig cfg(3);
  for (auto [Ne, re] : {std::pair{0, -2}, {2, 0}, {1, 1}}) {
    Dyadic N(Ne), r(re);
    auto ids = enumerate_regions(cfg, N, r);
    for (const auto& a : ids)
      for (const auto& b : ids)
        CHECK(adjacent(cfg, a, b) == adjacent_geometric(cfg, a, b));
  }
  RegionId a{Dyadic(0), Dyadic(0), 0, {0, 0, 0}};
  RegionId b{Dyadic(0), Dyadic(-1), 0, {0, 0, 0}};
  CHECK_THROWS_AS(adjacent(cfg, a, b), ValidationError);
}

TEST_CASE("separation requires depth and matches brute force") {
  LatticeConfig cfg(3);
  // Too shallow: every pair of d-fold ancestors is forced adjacent or the
  // lattice cannot even host d generations.
  CHECK_THROWS_AS(
      separated(cfg, RegionId{Dyadic(2), Dyadic(0), 0, {0, 0, 0}},
                RegionId{Dyadic(2), Dyadic(0), 0, {1, 1, 0}}),
      ValidationError);

  for (auto [Ne, re] : {std::pair{4, 0}, {5, 0}, {0, -4}}) {
    Dyadic N(Ne), r(re);
    auto ids = enumerate_regions(cfg, N, r);
    std::mt19937_64 rng(37 + Ne);
    std::shuffle(ids.begin(), ids.end(), rng);
    size_t probe = std::min<size_t>(ids.size(), 40);
    for (size_t i = 0; i < probe; ++i) {
      auto fast = separated_partners(cfg, ids[i]);
      auto brute = separated_partners_brute(cfg, ids[i]);
      CHECK(fast == brute);
      for (const auto& p : fast) {
        CHECK(separated(cfg, p, ids[i]));  // symmetric
        CHECK_FALSE(adjacent(cfg, p, ids[i]));
        CHECK(adjacent(cfg, ancestor(cfg, p, cfg.d),
                       ancestor(cfg, ids[i], cfg.d)));
      }
    }
  }
}

TEST_CASE("whitney cover resolves off-diagonal pairs uniquely") {
  LatticeConfig cfg(3);
  std::mt19937_64 rng(41);
  Dyadic N(0);
  int resolved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Vec xi = sample_point(rng, cfg, N);
    Vec eta = sample_point(rng, cfg, N);
    auto triple = whitney_cover_triple(cfg, N, xi, eta);
    if (!triple) continue;
    ++resolved;
    CHECK(region_contains(cfg, make_region(cfg, triple->first), xi));
    CHECK(region_contains(cfg, make_region(cfg, triple->second), eta));
    CHECK(separated(cfg, triple->first, triple->second));

    // Uniqueness: at every other admissible scale the pair containing
    // (xi, eta) is not separated.
    int count = 0;
    for (int e = -cfg.d; e >= -12; --e) {
      Dyadic r(e);
      auto a = locate(cfg, N, r, xi);
      auto b = locate(cfg, N, r, eta);
      REQUIRE(a.has_value());
      REQUIRE(b.has_value());
      if (separated(cfg, *a, *b)) ++count;
    }
    CHECK(count == 1);
    CHECK(triple->r.e >= -12);
  }
  CHECK(resolved > 30);  // random pairs are rarely near-diagonal
}

TEST_CASE("whitney triple list matches direct enumeration") {
  LatticeConfig cfg(2);
  Dyadic N(0), r_min(-4);
  auto triples = whitney_triples(cfg, N, r_min);
  std::set<std::tuple<int, RegionId, RegionId>> direct;
  for (int e = -cfg.d; e >= r_min.e; --e) {
    auto ids = enumerate_regions(cfg, N, Dyadic(e));
    for (const auto& a : ids)
      for (const auto& b : ids)
        if (separated(cfg, a, b)) direct.insert({e, a, b});
  }
  CHECK(triples.size() == direct.size());
  for (const auto& t : triples)
    CHECK(direct.count({t.r.e, t.first, t.second}) == 1);
  CHECK(whitney_triple_count(cfg, N, r_min) == direct.size());
}

TEST_CASE("whitney triple count matches direct enumeration in 3d") {
  LatticeConfig cfg(3);
  Dyadic N(1), r_min(-3);
  std::uint64_t direct = 0;
  for (int e = N.e - cfg.d; e >= r_min.e; --e) {
    auto ids = enumerate_regions(cfg, N, Dyadic(e));
    for (const auto& a : ids)
      for (const auto& b : ids)
        if (separated(cfg, a, b)) ++direct;
  }
  CHECK(whitney_triple_count(cfg, N, r_min) == direct);
  CHECK(direct > 0);
  // Materialization refuses rather than exhausting memory.
  CHECK_THROWS_AS(whitney_triples(cfg, Dyadic(0), Dyadic(-8)),
                  ValidationError);
}

TEST_CASE("region volumes match the closed-form radial factor") {
  LatticeConfig cfg(3);
  Region reg = make_region(cfg, RegionId{Dyadic(0), Dyadic(0), 0, {0, 0, 0}});
  // Radial factor (rho_hi^3 - rho_lo^3)/3 with rho in [1/2, 2] times the
  // solid angle of the cube.
  double radial = (8.0 - 0.125) / 3.0;
  double omega = solid_angle(cfg, reg.cube, 1e-11);
  CHECK(region_volume(cfg, reg, 1e-11) ==
        doctest::Approx(radial * omega).epsilon(1e-10));
  // Density (1 - |eta|^2)^{-1/2} is within eps1 of 1 on the base cube.
  CHECK(omega > 4.0 * cfg.ell * cfg.ell);
  CHECK(omega < (1.0 + cfg.eps1) * 4.0 * cfg.ell * cfg.ell);
}

TEST_CASE("sumset boxes capture pairwise sums of separated regions") {
  LatticeConfig cfg(3);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [Ne, re] : {std::pair{4, 0}, {0, -4}}) {
    Dyadic N(Ne), r(re);
    auto ids = enumerate_regions(cfg, N, r);
    std::shuffle(ids.begin(), ids.end(), rng);
    int pairs_checked = 0;
    for (const auto& a : ids) {
      if (pairs_checked >= 8) break;
      auto partners = separated_partners(cfg, a);
      if (partners.empty()) continue;
      const auto& b = partners[partners.size() / 2];
      SumsetBox box = sumset_box(cfg, a, b);
      Region ra = make_region(cfg, a), rb = make_region(cfg, b);
      for (int s = 0; s < 40; ++s) {
        Vec xi = ra.center, eta = rb.center;
        for (int i = 0; i < cfg.d; ++i) {
          xi[i] += (u(rng) - 0.5) * 0.5 * (ra.radial_hi - ra.radial_lo);
          eta[i] += (u(rng) - 0.5) * 0.5 * (rb.radial_hi - rb.radial_lo);
        }
        if (!region_contains(cfg, ra, xi) || !region_contains(cfg, rb, eta))
          continue;
        CHECK(sumset_box_contains(box, xi, eta));
      }
      ++pairs_checked;
    }
    CHECK(pairs_checked > 0);
  }
}

TEST_CASE("dyadic arithmetic is exact") {
  CHECK(Dyadic(3).value() == 8.0);
  CHECK(Dyadic(-4).value() == 0.0625);
  CHECK(Dyadic::from_double(0.25) == Dyadic(-2));
  CHECK((Dyadic(3) * Dyadic(-1)) == Dyadic(2));
  CHECK((Dyadic(3) / Dyadic(-1)) == Dyadic(4));
  CHECK(Dyadic(-1) < Dyadic(0));
  CHECK_THROWS_AS(Dyadic::from_double(0.3), ValidationError);
  CHECK(Dyadic(5).str() == "32");
  CHECK(Dyadic(-3).str() == "1/8");
}
