#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hyperbolax/extension.hpp"
#include "hyperbolax/function.hpp"
#include "hyperbolax/grid.hpp"

using namespace hyperbolax;

namespace {

SymbolicPtr small_gaussian() {
  return SymbolicFunction::gaussian({0.2, -0.1, 0.1}, 0.25, {1.0, 0.5});
}

SampledFunction sampled_for(const SymbolicPtr& s, double reach_x,
                            double reach_t, double oversample = 1.0) {
  const double rho = effective_support_radius(*s, 1e-9);
  auto g = std::make_shared<PolarGrid>(
      extension_sampling_spec(s->dim(), rho, reach_x, reach_t, oversample));
  return sample(s, g);
}

SpacetimeGrid small_grid(double R, int n, int nt) {
  SpacetimeGrid g;
  g.R_x = R;
  g.R_t = R;
  g.n_x = {n, n, n};
  g.n_t = nt;
  return g;
}

}  // namespace

TEST_CASE("spacetime grid round-trips through text and validates") {
  SpacetimeGrid g = small_grid(7.5, 13, 5);
  CHECK(SpacetimeGrid::parse(g.str()) == g);
  CHECK(g.dx(0) == doctest::Approx(15.0 / 12.0));
  CHECK(g.x_node(0, 6) == doctest::Approx(0.0));
  CHECK(g.t_node(2) == doctest::Approx(0.0));
  CHECK(g.size() == 13 * 13 * 13 * 5);

  SpacetimeGrid bad = g;
  bad.n_x[1] = 12;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = g;
  bad.R_t = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("indicator extension at the origin hits the closed form") {
  // T(1_{|xi|<=1})(0,0) = 2 pi (sqrt2 - ln(1+sqrt2)) in d=3.
  const double exact =
      2.0 * kPi * (std::sqrt(2.0) - std::log(1.0 + std::sqrt(2.0)));
  SpacetimeGrid origin = small_grid(0.5, 1, 1);
  ExtendOptions opts;
  opts.precise = true;
  double prev_err = 1.0;
  for (int panels : {1, 2, 4}) {
    auto g = std::make_shared<PolarGrid>(ball_spec(3, 1.0, panels, 8, 2, 4));
    auto f = sample(SymbolicFunction::ball_indicator(3, 1.0), g);
    ExtensionField F = extend(f, origin, opts);
    const double err = std::abs(std::abs(F.value(0)) - exact) / exact;
    CHECK(err < prev_err * 1.5);
    prev_err = err;
  }
  CHECK(prev_err < 1e-6);
}

TEST_CASE("batched extension matches the direct sum on every node") {
  auto f = sampled_for(small_gaussian(), 6.0, 6.0);
  SpacetimeGrid st = small_grid(6.0, 11, 7);
  for (bool precise : {false, true}) {
    ExtendOptions o;
    o.precise = precise;
    ExtensionField F = extend(f, st, o);
    ExtensionField D = extend_direct(f, st, o);
    double dev = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < F.values.size(); ++i) {
      dev = std::max(dev, std::abs(F.values[i] - D.values[i]));
      scale = std::max(scale, std::abs(D.values[i]));
    }
    CHECK(dev / scale < (precise ? 1e-11 : 2e-4));
  }
}

TEST_CASE("extension matches the adaptive oracle through the quadrature") {
  auto sym = small_gaussian();
  auto f = sampled_for(sym, 6.0, 6.0, 1.2);
  SpacetimeGrid st = small_grid(6.0, 11, 7);
  ExtendOptions o;
  o.precise = true;
  ExtensionField F = extend(f, st, o);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, F.values.size() - 1);
  double dev = 0.0, scale = 0.0;
  for (int k = 0; k < 12; ++k) {
    const std::size_t i = pick(rng);
    const cplx o_val = extend_oracle(*sym, F.node_x(i), F.node_t(i), 1e-8);
    dev = std::max(dev, std::abs(F.value(i) - o_val));
    scale = std::max(scale, std::abs(o_val));
  }
  CHECK(dev / scale < 1e-6);
}

TEST_CASE("extension is linear node-wise") {
  auto sym_g = small_gaussian();
  auto sym_h = SymbolicFunction::gaussian({-0.2, 0.15, 0.0}, 0.3, {0.4, -0.8});
  const double rho = std::max(effective_support_radius(*sym_g, 1e-9),
                              effective_support_radius(*sym_h, 1e-9));
  auto grid = std::make_shared<PolarGrid>(
      extension_sampling_spec(3, rho, 5.0, 5.0));
  auto f = sample(sym_g, grid);
  auto h = sample(sym_h, grid);
  const cplx a{0.7, -0.3}, b{-1.1, 0.2};
  SampledFunction combo = a * f + b * h;
  SpacetimeGrid st = small_grid(5.0, 9, 7);

  // Pin one carrier so the three fields superpose in the same gauge.
  ExtendOptions o;
  o.carrier_xi = Vec{0.0, 0.0, 0.0};
  o.carrier_omega = 1.0;
  ExtensionField Fc = extend(combo, st, o);
  ExtensionField Ff = extend(f, st, o);
  ExtensionField Fh = extend(h, st, o);
  double dev = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < Fc.values.size(); ++i) {
    dev = std::max(dev,
                   std::abs(Fc.values[i] - (a * Ff.values[i] + b * Fh.values[i])));
    scale = std::max(scale, std::abs(Fc.values[i]));
  }
  CHECK(dev / scale < 1e-12);
}

TEST_CASE("modulation shifts the field across the node lattice") {
  auto sym = small_gaussian();
  auto f = sampled_for(sym, 6.0, 6.0);
  SpacetimeGrid st = small_grid(6.0, 11, 7);
  ExtendOptions o;
  o.precise = true;
  ExtensionField F = extend(f, st, o);
  // Shift by exactly two x-steps and two t-steps: T(Mf)(x,t) = T(f)(x+x0,t+t0).
  const double x0 = 2.0 * st.dx(0), t0 = 2.0 * st.dt();
  SampledFunction mf = modulate(f, {x0, 0.0, 0.0}, t0);
  ExtensionField G = extend(mf, st, o);
  double dev = 0.0, scale = 0.0;
  for (int jt = 0; jt + 2 < st.n_t; ++jt)
    for (int jx = 0; jx + 2 < st.n_x[0]; ++jx)
      for (int jy = 0; jy < st.n_x[1]; ++jy)
        for (int jz = 0; jz < st.n_x[2]; ++jz) {
          const cplx shifted = F.value(F.index({jx + 2, jy, jz}, jt + 2));
          const cplx moved = G.value(G.index({jx, jy, jz}, jt));
          dev = std::max(dev, std::abs(shifted - moved));
          scale = std::max(scale, std::abs(shifted));
        }
  CHECK(dev / scale < 1e-8);
}

TEST_CASE("nonnegative input peaks at the origin and respects the mass bound") {
  auto f = sampled_for(SymbolicFunction::gaussian({0.0, 0.0, 0.0}, 0.3, {2.0, 0.0}),
                       8.0, 8.0);
  SpacetimeGrid st = small_grid(8.0, 13, 9);
  ExtensionField F = extend(f, st);
  const std::size_t origin = F.index({6, 6, 6}, 4);
  const double peak = std::abs(F.value(origin));
  double maxv = 0.0;
  for (std::size_t i = 0; i < F.values.size(); ++i)
    maxv = std::max(maxv, std::abs(F.values[i]));
  CHECK(maxv == doctest::Approx(peak).epsilon(1e-12));
  CHECK(maxv <= F.report.kept_mass * (1.0 + 1e-9));
  CHECK(F.report.dropped_mass < 1e-5 * F.report.kept_mass);
}

TEST_CASE("norms are stable under space-time grid doubling") {
  auto f = sampled_for(small_gaussian(), 10.0, 10.0);
  SpacetimeGrid st = small_grid(10.0, 17, 11);
  SpacetimeGrid fine = small_grid(10.0, 35, 23);
  ExtensionField F = extend(f, st);
  ExtensionField G = extend(f, fine);
  const double a = norm_Lp_spacetime(F, 3.6);
  const double b = norm_Lp_spacetime(G, 3.6);
  CHECK(std::abs(a - b) / b < 0.01);
}

TEST_CASE("mixed norm collapses to the plain norm and handles sup in time") {
  auto f = sampled_for(small_gaussian(), 5.0, 5.0);
  SpacetimeGrid st = small_grid(5.0, 9, 5);
  ExtensionField F = extend(f, st);
  const double p = 3.4;
  CHECK(mixed_norm(F, p, p) ==
        doctest::Approx(norm_Lp_spacetime(F, p)).epsilon(1e-12));
  // q = inf: sup over slices of the spatial L2 norm, rebuilt here with
  // hand-rolled composite Simpson weights.
  const double sup_l2 = mixed_norm(F, std::numeric_limits<double>::infinity(), 2.0);
  auto simpson = [](int n, double h) {
    std::vector<double> w(std::size_t(n), h / 3.0);
    for (int j = 1; j + 1 < n; ++j) w[j] = h * (j % 2 == 1 ? 4.0 : 2.0) / 3.0;
    return w;
  };
  std::vector<std::vector<double>> ax;
  for (int a = 0; a < 3; ++a) ax.push_back(simpson(st.n_x[a], st.dx(a)));
  double expect = 0.0;
  const std::size_t ns = st.n_spatial();
  for (int jt = 0; jt < st.n_t; ++jt) {
    double acc = 0.0;
    std::size_t s = 0;
    for (int i = 0; i < st.n_x[0]; ++i)
      for (int j = 0; j < st.n_x[1]; ++j)
        for (int k = 0; k < st.n_x[2]; ++k, ++s)
          acc += ax[0][i] * ax[1][j] * ax[2][k] *
                 std::norm(F.values[std::size_t(jt) * ns + s]);
    expect = std::max(expect, std::sqrt(acc));
  }
  CHECK(sup_l2 == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bilinear norm of a field with itself is the squared 2e norm") {
  auto f = sampled_for(small_gaussian(), 5.0, 5.0);
  SpacetimeGrid st = small_grid(5.0, 9, 5);
  ExtensionField F = extend(f, st);
  const double e = 1.8;
  const double lhs = bilinear_norm(F, F, e);
  const double rhs = norm_Lp_spacetime(F, 2.0 * e);
  CHECK(lhs == doctest::Approx(rhs * rhs).epsilon(1e-12));
  CHECK_THROWS_AS(bilinear_norm(F, F, 1.0), ValidationError);
}

TEST_CASE("transform and propagator identities hold to 1e-8 on small grids") {
  for (int d : {2, 3}) {
    Vec c(d, 0.1);
    auto g = std::make_shared<PolarGrid>(ball_spec(d, 1.2, 2, 4, 3, 4));
    auto f = sample(SymbolicFunction::gaussian(c, 0.35, {1.0, -0.4}), g);
    SpacetimeGrid st;
    st.R_x = 3.0;
    st.R_t = 3.0;
    st.n_x.assign(d, 7);
    st.n_t = 5;
    CHECK(fourier_transform_check(f, st).max_rel < 1e-8);
    CHECK(kg_propagator_check(f, st).max_rel < 1e-8);
  }
}

TEST_CASE("rayleigh quotient is scale-invariant and rejects zero input") {
  auto f = sampled_for(small_gaussian(), 6.0, 6.0);
  SpacetimeGrid st = small_grid(6.0, 11, 7);
  const double q = rayleigh(f, 3.6, st);
  SampledFunction cf = cplx{0.0, -2.5} * f;
  CHECK(rayleigh(cf, 3.6, st) == doctest::Approx(q).epsilon(1e-12));

  SampledFunction zero = cplx{0.0, 0.0} * f;
  CHECK_THROWS_AS(rayleigh(zero, 3.6, st), ValidationError);
}

TEST_CASE("undersampled grids are rejected with a resolution diagnostic") {
  auto f = sampled_for(small_gaussian(), 6.0, 6.0);
  SpacetimeGrid st = small_grid(6.0, 5, 5);  // dx = 3, far beyond pi/bandwidth
  CHECK_THROWS_WITH_AS(extend(f, st), doctest::Contains("need n_x"),
                       ValidationError);
  SpacetimeGrid st2 = small_grid(6.0, 21, 3);
  CHECK_THROWS_WITH_AS(extend(f, st2), doctest::Contains("need n_t"),
                       ValidationError);
}

TEST_CASE("extension fields are deterministic") {
  auto f = sampled_for(small_gaussian(), 5.0, 5.0);
  SpacetimeGrid st = small_grid(5.0, 9, 5);
  ExtensionField F = extend(f, st);
  ExtensionField G = extend(f, st);
  REQUIRE(F.values.size() == G.values.size());
  for (std::size_t i = 0; i < F.values.size(); ++i)
    CHECK(F.values[i] == G.values[i]);
}

TEST_CASE("tail report flags reach that truncates visibly") {
  auto sym = SymbolicFunction::gaussian({0.0, 0.0, 0.0}, 0.12, {1.0, 0.0});
  auto f = sampled_for(sym, 4.0, 4.0);
  SpacetimeGrid st = small_grid(4.0, 9, 9);
  ExtensionField F = extend(f, st);
  norm_Lp_spacetime(F, 4.0);
  // sigma = 0.12 packets have not begun to disperse by |t| = 4: the slice
  // decay fit should declare the truncated norm unreliable.
  CHECK(F.report.unreliable);
  CHECK(F.report.edge_ratio > 0.1);
}

TEST_CASE("field csv export carries grid, carrier, and node values") {
  auto f = sampled_for(small_gaussian(), 4.0, 4.0);
  SpacetimeGrid st = small_grid(4.0, 7, 5);
  ExtensionField F = extend(f, st);
  std::ostringstream os;
  save_field_csv(os, F);
  const std::string text = os.str();
  CHECK(text.find("# hyperbolax-field v1") == 0);
  CHECK(text.find("x1,x2,x3,t,re,im") != std::string::npos);
  std::size_t rows = 0;
  for (char ch : text)
    if (ch == '\n') ++rows;
  CHECK(rows == 3 + 1 + F.values.size());
}

TEST_CASE("default spacetime grid respects bandwidth and memory ceilings") {
  auto f = sampled_for(small_gaussian(), 6.0, 6.0);
  SpacetimeGrid st = default_spacetime_grid(f);
  CHECK(st.R_x == 40.0);
  SourceStats ss = analyze_sources(f);
  for (int a = 0; a < 3; ++a)
    CHECK(st.dx(a) * ss.bandwidth[a] < kPi);
  CHECK(st.dt() * ss.omega_band < kPi);

  auto wide = SymbolicFunction::boosted(small_gaussian(),
                                        {1.2, -0.8, 0.9});
  auto fw = sampled_for(wide, 6.0, 6.0);
  SpacetimeGrid stw = default_spacetime_grid(fw);
  CHECK(stw.R_x < 40.0);
  CHECK(stw.size() < std::size_t(12e6));
}
