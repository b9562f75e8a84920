#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

#include "hyperbolax/grid.hpp"
#include "hyperbolax/inequality.hpp"

using namespace hyperbolax;

namespace {

SpacetimeGrid box(double R, int n, int nt) {
  SpacetimeGrid g;
  g.R_x = R;
  g.R_t = R;
  g.n_x = {n, n, n};
  g.n_t = nt;
  return g;
}

SpacetimeGrid doubled(SpacetimeGrid g) {
  for (int& n : g.n_x) n = 2 * n - 1;
  g.n_t = 2 * g.n_t - 1;
  return g;
}

SampledFunction on_patch(const SymbolicPtr& f, const LatticeConfig& cfg,
                         Dyadic N, Dyadic align, int nr = 2, int na = 2) {
  auto g = std::make_shared<PolarGrid>(
      PolarGrid(patch_spec(cfg, N, align, nr, 1 << (N.e - align.e), na)));
  return sample(f, g);
}

RegionId cap_id(Dyadic N, Dyadic r, int j, int k0, int k1) {
  RegionId id;
  id.N = N;
  id.r = r;
  id.j = j;
  id.k = {k0, k1, 0};
  return id;
}

}  // namespace

TEST_CASE("p_range matches the dimension table") {
  CHECK(p_range(1).first == 6.0);
  CHECK(std::isinf(p_range(1).second));
  CHECK(p_range(2).first == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(p_range(2).second == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(p_range(3).first == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  CHECK(p_range(3).second == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(p_range(0), ValidationError);
}

TEST_CASE("admissible pairs: scaling line, bounds, and the excluded corner") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(is_admissible_pair(10.0 / 3.0, 10.0 / 3.0, 1.0, 3));
  CHECK_FALSE(is_admissible_pair(2.0, inf, 0.0, 3));  // scaling holds, excluded
  CHECK_FALSE(is_admissible_pair(1.9, 14.0, 1.0, 3));
  CHECK(is_admissible_pair(inf, 2.0, 0.5, 3));
  CHECK_FALSE(is_admissible_pair(4.0, 7.0, 0.5, 3));  // r beyond 2d/(d-2)
  CHECK_FALSE(is_admissible_pair(10.0 / 3.0, 10.0 / 3.0, 0.9, 3));

  // theta = 1 with q = r lands on p_min, theta = 0 on p_max, for every d.
  for (int d = 2; d <= 4; ++d) {
    const auto range = p_range(d);
    const double q1 = 2.0 * (d + 2.0) / d;
    const double q0 = 2.0 * (d + 1.0) / (d - 1.0);
    CHECK(q1 == doctest::Approx(range.first).epsilon(1e-15));
    CHECK(q0 == doctest::Approx(range.second).epsilon(1e-15));
    CHECK(is_admissible_pair(q1, q1, 1.0, d));
    CHECK(is_admissible_pair(q0, q0, 0.0, d));
  }
}

TEST_CASE("select_mixed_pairs returns an interior admissible split") {
  for (double p : {3.4, 3.6, 3.9}) {
    const auto pr = select_mixed_pairs(p, 3);
    const AdmissiblePair& a = pr.first;
    const AdmissiblePair& b = pr.second;
    CHECK(is_admissible_pair(a.q, a.r, a.theta, 3));
    CHECK(is_admissible_pair(b.q, b.r, b.theta, 3));
    CHECK(1.0 / a.q + 1.0 / b.q == doctest::Approx(2.0 / p).epsilon(1e-12));
    CHECK(1.0 / a.r + 1.0 / b.r == doctest::Approx(2.0 / p).epsilon(1e-12));
    CHECK(b.q < p);
    CHECK(p < a.q);
    CHECK(a.r < p);
    CHECK(p < b.r);
    CHECK(1.0 / b.q - 1.0 / b.r > 0.0);
  }
  CHECK_THROWS_AS(select_mixed_pairs(10.0 / 3.0, 3), ValidationError);
  CHECK_THROWS_AS(select_mixed_pairs(4.0, 3), ValidationError);
  CHECK_THROWS_AS(select_mixed_pairs(3.6, 2), ValidationError);
}

TEST_CASE("bilinear exponents close at the range endpoints as s -> 2") {
  const double s = 2.0 - 1e-12;
  const auto cap = bilinear_exponents(3, 10.0 / 3.0, s, RegionKind::cap);
  CHECK(cap.first == doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(cap.second == doctest::Approx(0.0).epsilon(1e-10));
  const auto sec = bilinear_exponents(3, 4.0, s, RegionKind::sector);
  CHECK(sec.first == doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(sec.second == doctest::Approx(0.0).epsilon(1e-10));
  CHECK_THROWS_AS(bilinear_exponents(3, 3.6, 2.0, RegionKind::cap),
                  ValidationError);
  CHECK_THROWS_AS(bilinear_exponents(3, 5.0, 1.9, RegionKind::cap),
                  ValidationError);
}

TEST_CASE("refined volume exponents keep their signs across the p range") {
  for (int d = 2; d <= 4; ++d) {
    const auto range = p_range(d);
    for (double p : {range.first, 0.5 * (range.first + range.second),
                     range.second}) {
      CHECK(0.5 * p - double(d + 2) / d >= -1e-12);
      CHECK(0.5 * p - double(d + 1) / (d - 1) <= 1e-12);
    }
  }
}

TEST_CASE("exponent set defaults sit inside the open gamma interval") {
  const ExponentSet e = ExponentSet::defaults(3, 3.6);
  CHECK(e.gamma == doctest::Approx(0.5 * (1.0 - 2.0 / 3.6)).epsilon(1e-15));
  CHECK(1.0 / e.s + 1.0 / e.s_prime == doctest::Approx(1.0).epsilon(1e-15));
  ExponentSet bad = e;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = e;
  bad.gamma = 1.0 - 2.0 / bad.p;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = e;
  bad.s = 2.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = e;
  bad.p = 5.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("decoupling report: single shell reduces to the rayleigh ratio") {
  auto g = std::make_shared<PolarGrid>(PolarGrid(ball_spec(3, 0.9, 4, 4, 2, 3)));
  SampledFunction f = sample(SymbolicFunction::ball_indicator(3, 0.9), g);
  const SpacetimeGrid st = box(3.0, 11, 5);

  const InequalityReport rep = decoupling_report(f, 3.6, 3, st);
  CHECK(rep.witness == "N=1");
  CHECK(rep.rhs > 0.0);
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.ratio == doctest::Approx(rep.lhs / rep.rhs).epsilon(1e-15));

  // With a single occupied shell, f_1 = f and the ratio collapses to
  // (||T f||_p / ||f||_2)^2.
  ExtensionField F = extend(f, st);
  const double quotient = norm_Lp_spacetime(F, 3.6) / norm_L2_hyperboloid(f);
  CHECK(rep.ratio == doctest::Approx(quotient * quotient).epsilon(1e-10));
  CHECK(rep.ratio < 50.0);

  CHECK_THROWS_AS(decoupling_report(cplx{0.0, 0.0} * f, 3.6, 3, st),
                  ValidationError);
  CHECK_THROWS_AS(decoupling_report(f, 5.0, 3, st), ValidationError);
}

TEST_CASE("decoupling report: witness follows the dominant shell") {
  auto g = std::make_shared<PolarGrid>(PolarGrid(ball_spec(3, 3.8, 8, 4, 2, 3)));
  SymbolicPtr inner = SymbolicFunction::ball_indicator(3, 0.9);
  SymbolicPtr outer = SymbolicFunction::shell_piece(
      SymbolicFunction::ball_indicator(3, 3.8), Dyadic::from_exponent(2));
  const SpacetimeGrid st = box(3.0, 13, 7);

  auto weighted = [&](cplx a, cplx b) {
    return sample(SymbolicFunction::sum({SymbolicFunction::scaled(inner, a),
                                         SymbolicFunction::scaled(outer, b)}),
                  g);
  };
  CHECK(decoupling_report(weighted({0.05, 0.0}, {5.0, 0.0}), 3.6, 3, st)
            .witness == "N=4");
  CHECK(decoupling_report(weighted({5.0, 0.0}, {0.05, 0.0}), 3.6, 3, st)
            .witness == "N=1");

  // Amplitudes at the underflow edge: the p-th powers vanish, the report
  // degrades gracefully instead of throwing.
  const InequalityReport tiny =
      decoupling_report(weighted({1e-120, 0.0}, {1e-122, 0.0}), 3.6, 3, st);
  CHECK(tiny.degenerate);
  CHECK(tiny.rhs >= 0.0);
}

TEST_CASE("decoupling ratio is stable under grid doubling") {
  auto g = std::make_shared<PolarGrid>(PolarGrid(ball_spec(3, 0.9, 4, 4, 2, 3)));
  SampledFunction f = sample(SymbolicFunction::ball_indicator(3, 0.9), g);
  const SpacetimeGrid st = box(3.0, 11, 5);
  const double r0 = decoupling_report(f, 3.6, 3, st).ratio;
  const double r1 = decoupling_report(f, 3.6, 3, doubled(st)).ratio;
  CHECK(std::abs(r1 - r0) / r0 < 0.10);
}

TEST_CASE("bilinear report: homogeneity, witness, and separation guard") {
  const LatticeConfig cfg;
  const Dyadic N{0}, r = Dyadic::from_exponent(-4);
  const RegionId ka = cap_id(N, r, 2, 1, 6);
  const RegionId kb = cap_id(N, r, 3, 11, 7);
  REQUIRE(separated(cfg, ka, kb));

  const Vec ca = region_center(cfg, ka);
  const Vec cb = region_center(cfg, kb);
  SymbolicPtr bump_a = SymbolicFunction::gaussian(ca, 0.02, {1.0, 0.3});
  SymbolicPtr bump_b = SymbolicFunction::gaussian(cb, 0.02, {0.8, -0.5});
  auto g = std::make_shared<PolarGrid>(
      PolarGrid(patch_spec(cfg, N, r, 2, 16, 2)));
  SampledFunction f = sample(bump_a, g);
  SampledFunction h = sample(bump_b, g);
  const SpacetimeGrid st = box(2.5, 7, 5);

  const InequalityReport rep = bilinear_report(f, h, ka, kb, 1.9, 3.6, st, cfg);
  CHECK(rep.lhs > 0.0);
  CHECK(rep.rhs > 0.0);
  CHECK(rep.witness.find("j=2") != std::string::npos);
  CHECK(rep.witness.find("j=3") != std::string::npos);

  const cplx c{0.31, -1.7};
  const InequalityReport scaled =
      bilinear_report(c * f, c * h, ka, kb, 1.9, 3.6, st, cfg);
  CHECK(scaled.ratio == doctest::Approx(rep.ratio).epsilon(1e-12));

  RegionId near = ka;
  near.k[0] += 1;
  CHECK_THROWS_AS(bilinear_report(f, h, ka, near, 1.9, 3.6, st, cfg),
                  ValidationError);
  RegionId coarse_a = cap_id(N, Dyadic::from_exponent(-2), 1, 0, 1);
  RegionId coarse_b = cap_id(N, Dyadic::from_exponent(-2), 1, 3, 2);
  CHECK_THROWS_AS(bilinear_report(f, h, coarse_a, coarse_b, 1.9, 3.6, st, cfg),
                  ValidationError);
}

TEST_CASE("refined report: concentrated bump pins the witness to its cap") {
  const LatticeConfig cfg;
  const Dyadic N{0};
  const RegionId kappa0 = cap_id(N, Dyadic::from_exponent(-2), 0, 1, 2);
  SampledFunction f = on_patch(SymbolicFunction::region_indicator(cfg, kappa0),
                               cfg, N, Dyadic::from_exponent(-4));
  const SpacetimeGrid st = box(2.5, 7, 5);
  const ExponentSet exps = ExponentSet::defaults(3, 3.6);

  const InequalityReport rep = refined_report(f, N, exps, st, cfg);
  CHECK(rep.lhs > 0.0);
  CHECK(rep.rhs > 0.0);
  CHECK_FALSE(rep.degenerate);
  // The cap volume exponent is nonnegative, so among the nested regions that
  // hold the whole bump the coarsest one wins; that is kappa0's top ancestor.
  CHECK(rep.witness.rfind("N=1 r=1 j=0 k=(0,0)", 0) == 0);
  CHECK(rep.witness.find("finer caps excluded") != std::string::npos);

  const InequalityReport fine = refined_report(f, N, exps, doubled(st), cfg);
  CHECK(fine.witness.substr(0, fine.witness.find(';')) ==
        rep.witness.substr(0, rep.witness.find(';')));
  CHECK(std::abs(fine.ratio - rep.ratio) / rep.ratio < 0.10);

  CHECK_THROWS_AS(refined_report(f, Dyadic{2}, exps, st, cfg),
                  ValidationError);
}

TEST_CASE("refined report engages the sector branch on higher shells") {
  const LatticeConfig cfg;
  const Dyadic N{2};
  const RegionId kappa0 = cap_id(N, Dyadic::from_exponent(-2), 1, 5, 9);
  SampledFunction f = on_patch(SymbolicFunction::region_indicator(cfg, kappa0),
                               cfg, N, Dyadic::from_exponent(-4));
  const SpacetimeGrid st = box(1.5, 9, 5);
  const ExponentSet exps = ExponentSet::defaults(3, 3.6);

  const InequalityReport rep = refined_report(f, N, exps, st, cfg);
  CHECK(rep.lhs > 0.0);
  CHECK(rep.rhs > 0.0);
  // Caps carry a nonnegative volume exponent (best at r=1), sectors a
  // nonpositive one (best at r=2); the cap branch leads with the bump's
  // r=1 ancestor.
  CHECK(rep.witness.rfind("N=4 r=1 j=0 k=(1,2)", 0) == 0);
}

TEST_CASE("whitney reconstruction is exact at the quadrature level") {
  const LatticeConfig cfg;
  const Dyadic N{0}, quarter = Dyadic::from_exponent(-2);
  // Two quarter-scale caps whose finest-level pieces all pair up as
  // separated at 2^-4: angular offset 12 cells on the first axis.
  const RegionId ka = cap_id(N, quarter, 0, 0, 1);
  const RegionId kb = cap_id(N, quarter, 0, 3, 2);
  SymbolicPtr f_sym = SymbolicFunction::sum(
      {SymbolicFunction::region_indicator(cfg, ka),
       SymbolicFunction::scaled(SymbolicFunction::region_indicator(cfg, kb),
                                {0.7, 0.4})});
  SampledFunction f = on_patch(f_sym, cfg, N, Dyadic::from_exponent(-4));
  const SpacetimeGrid st = box(2.5, 7, 5);

  const InequalityReport rep =
      whitney_reconstruction_check(f, N, 3.6, st, cfg);
  // The identity is algebraic, so it holds even though the small box flags
  // its norms as truncation-suspect.
  CHECK(std::abs(rep.ratio - 1.0) <= 1e-6);

  std::size_t pieces = 0, sep = 0, near = 0, far = 0;
  REQUIRE(std::sscanf(rep.witness.c_str(),
                      "pieces=%zu at r=1/16; separated pairs=%zu, near=%zu, "
                      "far=%zu",
                      &pieces, &sep, &near, &far) == 4);
  CHECK(pieces > 2);
  CHECK(sep > 0);
  CHECK(near >= 1);  // grouped blocks; self-pairs keep this nonzero
  CHECK(far == 0);
  CHECK(rep.witness.find("outside") == std::string::npos);

  CHECK_THROWS_AS(whitney_reconstruction_check(f, N, 3.6, st, cfg,
                                               Dyadic::from_exponent(-2)),
                  ValidationError);
  CHECK_THROWS_AS(whitney_reconstruction_check(f, N, 1.5, st, cfg),
                  ValidationError);
}

TEST_CASE("reports serialize as key=value lines") {
  InequalityReport rep;
  rep.lhs = 2.0;
  rep.rhs = 4.0;
  rep.ratio = 0.5;
  rep.witness = "N=1";
  std::ostringstream os;
  print_report(os, rep);
  CHECK(os.str() == "lhs=2\nrhs=4\nratio=0.5\nwitness=N=1\nflags=none\n");
  rep.unreliable = true;
  rep.degenerate = true;
  std::ostringstream os2;
  print_report(os2, rep);
  CHECK(os2.str().find("flags=truncation-suspect,degenerate") !=
        std::string::npos);
}
