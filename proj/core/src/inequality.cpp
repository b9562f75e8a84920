#include "hyperbolax/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "hyperbolax/constants.hpp"

namespace hyperbolax {

namespace {

std::string region_label(const LatticeConfig& cfg, const RegionId& id) {
  std::ostringstream os;
  os << "N=" << id.N.str() << " r=" << id.r.str() << " j=" << id.j << " k=(";
  for (int i = 0; i < cfg.d - 1; ++i) {
    if (i) os << ",";
    os << id.k[i];
  }
  os << ")";
  return os.str();
}

void check_p(double p, int d, const char* who) {
  const auto range = p_range(d);
  if (!(p >= range.first && p <= range.second)) {
    std::ostringstream os;
    os << who << ": p=" << p << " outside the admissible range ["
       << range.first << ", " << range.second << "] for d=" << d;
    throw ValidationError(os.str());
  }
}

void finish(InequalityReport& rep) {
  if (rep.rhs > 0.0)
    rep.ratio = rep.lhs / rep.rhs;
  else
    rep.degenerate = true;
}

}  // namespace

ExponentSet ExponentSet::defaults(int d, double p) {
  ExponentSet e;
  e.d = d;
  e.p = p;
  e.gamma = 0.5 * (1.0 - 2.0 / p);
  e.s = 1.9;
  e.s_prime = e.s / (e.s - 1.0);
  e.validate();
  return e;
}

void ExponentSet::validate() const {
  check_p(p, d, "ExponentSet");
  if (!(gamma > 0.0 && gamma < 1.0 - 2.0 / p))
    throw ValidationError("ExponentSet: gamma must lie in (0, 1 - 2/p)");
  if (!(s >= 1.0 && s < 2.0))
    throw ValidationError("ExponentSet: s must lie in [1, 2)");
  if (std::abs(1.0 / s + 1.0 / s_prime - 1.0) > 1e-12)
    throw ValidationError("ExponentSet: s and s_prime are not conjugate");
}

std::pair<double, double> p_range(int d) {
  if (d < 1) throw ValidationError("p_range: dimension must be >= 1");
  if (d == 1) return {6.0, std::numeric_limits<double>::infinity()};
  return {2.0 * (d + 2) / d, 2.0 * (d + 1) / (d - 1)};
}

bool is_admissible_pair(double q, double r, double theta, int d) {
  if (d < 1) throw ValidationError("is_admissible_pair: dimension must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) return false;
  if (!(q >= 2.0) || !(r >= 2.0)) return false;
  if (d >= 3 && !(r <= 2.0 * d / (d - 2))) return false;
  if (q == 2.0 && std::isinf(r)) return false;
  const double a = d - 1.0 + theta;
  const double lhs = 2.0 / q + a / r;  // infinite exponents contribute zero
  return std::abs(lhs - 0.5 * a) <= 1e-12;
}

std::pair<AdmissiblePair, AdmissiblePair> select_mixed_pairs(double p, int d) {
  if (d < 3) throw ValidationError("select_mixed_pairs: requires d >= 3");
  const auto range = p_range(d);
  if (!(p > range.first && p < range.second)) {
    std::ostringstream os;
    os << "select_mixed_pairs: p must lie strictly inside (" << range.first
       << ", " << range.second << ")";
    throw ValidationError(os.str());
  }

  // Split 1/q and 1/r around 1/p: u = 1/q0 below, v = 1/r0 above. Each
  // candidate is scored by its worst constraint margin and the best interior
  // point wins, so the result is deterministic and stays away from equality
  // cases.
  const double ip = 1.0 / p, tp = 2.0 / p;
  const double r_inv_min = (d - 2.0) / (2.0 * d);  // 1/r at the upper endpoint
  static const char* names[] = {
      "q0 finite (1/q0 > 0)",      "q1 < p < q0 (1/q0 < 1/p)",
      "r0 < p < r1 (1/r0 > 1/p)",  "r0 >= 2",
      "r0 within the d-range",     "r1 within the d-range",
      "r1 >= 2",                   "q1 >= 2",
      "theta0 >= 0",               "theta0 <= 1",
      "theta1 >= 0",               "theta1 <= 1",
      "series gain 1/q1 > 1/r1"};
  auto margins = [&](double u, double v, double* m) {
    const double th0 = 2.0 * u / (0.5 - v) - (d - 1.0);
    const double th1 = 2.0 * (tp - u) / (0.5 - (tp - v)) - (d - 1.0);
    m[0] = u;
    m[1] = ip - u;
    m[2] = v - ip;
    m[3] = 0.5 - v;
    m[4] = v - r_inv_min;
    m[5] = (tp - v) - r_inv_min;
    m[6] = 0.5 - (tp - v);
    m[7] = u - (tp - 0.5);
    m[8] = th0;
    m[9] = 1.0 - th0;
    m[10] = th1;
    m[11] = 1.0 - th1;
    m[12] = v - u;
  };

  const int steps = 320;
  double best = -std::numeric_limits<double>::infinity();
  double bu = 0.0, bv = 0.0;
  int worst_at_best = 0;
  for (int i = 1; i < steps; ++i) {
    const double u = ip * i / steps;
    for (int j = 1; j < steps; ++j) {
      const double v = ip + (0.5 - ip) * j / steps;
      double m[13];
      margins(u, v, m);
      int worst = 0;
      for (int t = 1; t < 13; ++t)
        if (m[t] < m[worst]) worst = t;
      if (m[worst] > best) {
        best = m[worst];
        bu = u;
        bv = v;
        worst_at_best = worst;
      }
    }
  }
  if (!(best > 1e-9)) {
    std::ostringstream os;
    os << "select_mixed_pairs: no admissible split of p=" << p
       << " found; binding constraint: " << names[worst_at_best];
    throw ValidationError(os.str());
  }

  AdmissiblePair a, b;
  a.q = 1.0 / bu;
  a.r = 1.0 / bv;
  a.theta = 2.0 * bu / (0.5 - bv) - (d - 1.0);
  b.q = 1.0 / (tp - bu);
  b.r = 1.0 / (tp - bv);
  b.theta = 2.0 * (tp - bu) / (0.5 - (tp - bv)) - (d - 1.0);
  if (!is_admissible_pair(a.q, a.r, a.theta, d) ||
      !is_admissible_pair(b.q, b.r, b.theta, d))
    throw NumericalError("select_mixed_pairs: selected pair failed recheck");
  return {a, b};
}

std::pair<double, double> bilinear_exponents(int d, double p, double s,
                                             RegionKind regime) {
  if (d < 2) throw ValidationError("bilinear_exponents: requires d >= 2");
  check_p(p, d, "bilinear_exponents");
  if (!(s >= 1.0 && s < 2.0))
    throw ValidationError("bilinear_exponents: s must lie in [1, 2)");
  const double isp = 1.0 - 1.0 / s;  // 1/s'
  const double expN = -2.0 / s;
  const double expR = regime == RegionKind::cap
                          ? 2.0 * d * isp - 2.0 * (d + 2) / p
                          : 2.0 * (d - 1) * isp - 2.0 * (d + 1) / p;
  return {expN, expR};
}

InequalityReport decoupling_report(const SampledFunction& f, double p, int d,
                                   const SpacetimeGrid& grid) {
  if (f.grid->dim() != d)
    throw ValidationError("decoupling_report: dimension mismatch");
  check_p(p, d, "decoupling_report");
  const double l2 = norm_L2_hyperboloid(f);
  if (l2 == 0.0) throw ValidationError("decoupling_report: zero input");

  InequalityReport rep;
  ExtensionField F = extend(f, grid);
  rep.lhs = std::pow(norm_Lp_spacetime(F, p), p);
  rep.unreliable = F.report.unreliable;

  // Shell carriers are pinned to the whole function's carrier so one grid
  // passes the resolution guard for every piece.
  const SourceStats st = analyze_sources(f);
  ExtendOptions opts;
  opts.carrier_xi = st.carrier_xi;
  opts.carrier_omega = st.carrier_omega;

  const PolarGrid& pg = *f.grid;
  double rho_max = 0.0;
  {
    std::size_t i = 0;
    for (std::size_t ir = 0; ir < pg.n_radial(); ++ir)
      for (std::size_t ia = 0; ia < pg.n_angular(); ++ia, ++i)
        if (f.values[i] != cplx{0.0, 0.0}) rho_max = std::max(rho_max, pg.rho(ir));
  }

  for (int e = 0; Dyadic{e}.value() * 0.5 <= rho_max || e == 0; ++e) {
    const Dyadic N{e};
    SampledFunction piece = lp_piece(f, N);
    bool nonzero = false;
    for (const cplx& v : piece.values)
      if (v != cplx{0.0, 0.0}) {
        nonzero = true;
        break;
      }
    if (!nonzero) continue;
    ExtensionField P = extend(piece, grid, opts);
    const double term = std::pow(norm_Lp_spacetime(P, p), p - 2.0) * l2 * l2;
    rep.unreliable = rep.unreliable || P.report.unreliable;
    if (term > rep.rhs) {
      rep.rhs = term;
      rep.witness = "N=" + N.str();
    }
  }
  finish(rep);
  return rep;
}

InequalityReport bilinear_report(const SampledFunction& f,
                                 const SampledFunction& g,
                                 const RegionId& kappa,
                                 const RegionId& kappa_prime, double s,
                                 double p, const SpacetimeGrid& grid,
                                 const LatticeConfig& cfg) {
  if (f.grid->dim() != cfg.d || g.grid->dim() != cfg.d)
    throw ValidationError("bilinear_report: dimension mismatch");
  check_p(p, cfg.d, "bilinear_report");
  if (!(s >= 1.0 && s < 2.0))
    throw ValidationError("bilinear_report: s must lie in [1, 2)");
  if (!separated(cfg, kappa, kappa_prime))
    throw ValidationError("bilinear_report: regions are not separated");

  const Region ka = make_region(cfg, kappa);
  const Region kb = make_region(cfg, kappa_prime);
  SampledFunction fk = restrict_region(f, cfg, ka);
  SampledFunction gk = restrict_region(g, cfg, kb);

  InequalityReport rep;
  rep.witness =
      region_label(cfg, kappa) + " x " + region_label(cfg, kappa_prime);

  const auto exps = bilinear_exponents(cfg.d, p, s, ka.kind);
  rep.rhs = std::pow(kappa.N.value(), exps.first) *
            std::pow(kappa.r.value(), exps.second) *
            norm_Ls_lebesgue(fk, s) * norm_Ls_lebesgue(gk, s);

  const SourceStats sf = analyze_sources(f);
  const SourceStats sg = analyze_sources(g);
  ExtendOptions of_;
  of_.carrier_xi = sf.carrier_xi;
  of_.carrier_omega = sf.carrier_omega;
  ExtendOptions og;
  og.carrier_xi = sg.carrier_xi;
  og.carrier_omega = sg.carrier_omega;
  ExtensionField F = extend(fk, grid, of_);
  ExtensionField G = extend(gk, grid, og);
  rep.lhs = bilinear_norm(F, G, 0.5 * p);
  norm_Lp_spacetime(F, p);
  norm_Lp_spacetime(G, p);
  rep.unreliable = F.report.unreliable || G.report.unreliable;
  finish(rep);
  return rep;
}

namespace {

struct ShellPieces {
  SampledFunction f_N;
  double l2 = 0.0;
  SourceStats stats;
  ExtendOptions opts;
  std::vector<std::uint32_t> nonzero;
};

ShellPieces shell_setup(const SampledFunction& f, Dyadic N, const char* who) {
  ShellPieces sp;
  sp.f_N = lp_piece(f, N);
  sp.l2 = norm_L2_hyperboloid(sp.f_N);
  if (sp.l2 == 0.0)
    throw ValidationError(std::string(who) + ": shell N=" + N.str() +
                          " is empty");
  sp.stats = analyze_sources(sp.f_N);
  sp.opts.carrier_xi = sp.stats.carrier_xi;
  sp.opts.carrier_omega = sp.stats.carrier_omega;
  for (std::size_t i = 0; i < sp.f_N.size(); ++i)
    if (sp.f_N.values[i] != cplx{0.0, 0.0})
      sp.nonzero.push_back(std::uint32_t(i));
  return sp;
}

SampledFunction materialize(const SampledFunction& base,
                            const std::vector<std::uint32_t>& idxs) {
  SampledFunction pc;
  pc.grid = base.grid;
  pc.family = "custom";
  pc.values.assign(base.size(), cplx{0.0, 0.0});
  for (std::uint32_t i : idxs) pc.values[i] = base.values[i];
  return pc;
}

}  // namespace

InequalityReport refined_report(const SampledFunction& f, Dyadic N,
                                const ExponentSet& exps,
                                const SpacetimeGrid& grid,
                                const LatticeConfig& cfg, RegionId* argmax) {
  if (f.grid->dim() != cfg.d || exps.d != cfg.d)
    throw ValidationError("refined_report: dimension mismatch");
  exps.validate();
  const double p = exps.p, gamma = exps.gamma;

  ShellPieces sp = shell_setup(f, N, "refined_report");
  ExtensionField FN = extend(sp.f_N, grid, sp.opts);
  InequalityReport rep;
  rep.lhs = std::pow(norm_Lp_spacetime(FN, p), p);
  rep.unreliable = FN.report.unreliable;

  const PolarGrid& pg = *f.grid;
  const double C = constants().refined_prune_constant;
  const double pow_g = p * gamma;
  const int floor_e = constants().whitney_floor_exp;

  double best_cap = 0.0, best_sector = 0.0, best_all = 0.0;
  std::string wit = "none";
  RegionId wit_id{N, Dyadic{0}, 0, {}};
  double outside2 = 0.0;
  bool outside_done = false;

  auto run_scale = [&](Dyadic r, bool cap) {
    double& best = cap ? best_cap : best_sector;
    const double vol_exp =
        cap ? (0.5 * p - double(cfg.d + 2) / cfg.d) * (1.0 - gamma)
            : (0.5 * p - double(cfg.d + 1) / (cfg.d - 1)) * (1.0 - gamma);
    const double dim_pow = cap ? double(cfg.d) : double(cfg.d - 1);
    const double factor = std::pow(r.value(), dim_pow * vol_exp);
    // Scale-level skip: no piece can beat the branch leader through the
    // crude operator bound.
    if (factor * std::pow(C * sp.l2, pow_g) <= best) return;

    std::map<RegionId, std::vector<std::uint32_t>> buckets;
    for (std::uint32_t i : sp.nonzero) {
      const auto loc = locate(cfg, N, r, pg.node(i));
      if (loc)
        buckets[*loc].push_back(i);
      else if (!outside_done)
        outside2 += std::norm(sp.f_N.values[i]) * pg.w_sigma(i);
    }
    outside_done = true;

    struct Cand {
      double mass;
      const RegionId* id;
      const std::vector<std::uint32_t>* idxs;
    };
    std::vector<Cand> order;
    order.reserve(buckets.size());
    for (const auto& kv : buckets) {
      double m2 = 0.0;
      for (std::uint32_t i : kv.second)
        m2 += std::norm(sp.f_N.values[i]) * pg.w_sigma(i);
      order.push_back({std::sqrt(m2), &kv.first, &kv.second});
    }
    std::sort(order.begin(), order.end(), [](const Cand& a, const Cand& b) {
      if (a.mass != b.mass) return a.mass > b.mass;
      return *a.id < *b.id;
    });
    for (const Cand& c : order) {
      if (factor * std::pow(C * c.mass, pow_g) <= best) break;
      SampledFunction pc = materialize(sp.f_N, *c.idxs);
      ExtensionField P = extend(pc, grid, sp.opts);
      const double contribution =
          factor * std::pow(norm_Lp_spacetime(P, p), pow_g);
      rep.unreliable = rep.unreliable || P.report.unreliable;
      if (contribution > best) best = contribution;
      if (contribution > best_all) {
        best_all = contribution;
        wit = region_label(cfg, *c.id);
        wit_id = *c.id;
      }
    }
  };

  for (int e = 0; e >= floor_e; --e) run_scale(Dyadic{e}, true);
  for (int e = 1; e <= N.e; ++e) run_scale(Dyadic{e}, false);

  rep.rhs = (best_cap + best_sector) * std::pow(sp.l2, p * (1.0 - gamma));
  std::ostringstream os;
  os << wit << "; cap floor r=2^" << floor_e << ", finer caps excluded";
  const double outside_share = sp.l2 > 0.0 ? std::sqrt(outside2) / sp.l2 : 0.0;
  if (outside_share > 0.0) {
    os << "; mass share outside region cover=" << outside_share;
    if (outside_share > 1e-6) rep.unreliable = true;
  }
  rep.witness = os.str();
  if (argmax != nullptr) {
    if (best_all <= 0.0)
      throw NumericalError("refined_report: no region contribution to report");
    *argmax = wit_id;
  }
  finish(rep);
  return rep;
}

InequalityReport whitney_reconstruction_check(const SampledFunction& f,
                                              Dyadic N, double p,
                                              const SpacetimeGrid& grid,
                                              const LatticeConfig& cfg,
                                              Dyadic r_min) {
  if (f.grid->dim() != cfg.d)
    throw ValidationError("whitney_reconstruction_check: dimension mismatch");
  if (!(p >= 2.0))
    throw ValidationError("whitney_reconstruction_check: need p >= 2");
  if (r_min.e + cfg.d > N.e)
    throw ValidationError(
        "whitney_reconstruction_check: r_min must satisfy r_min <= N/2^d");

  ShellPieces sp = shell_setup(f, N, "whitney_reconstruction_check");
  sp.opts.precise = true;
  ExtensionField FN = extend(sp.f_N, grid, sp.opts);
  InequalityReport rep;
  rep.lhs = std::pow(norm_Lp_spacetime(FN, p), p);
  rep.unreliable = FN.report.unreliable;

  // Finest-level pieces through unique node assignment, so the pieces tile
  // f_N exactly and the regrouped bilinear sum reproduces T(f_N)^2 through
  // linearity alone.
  const PolarGrid& pg = *f.grid;
  std::map<RegionId, std::vector<std::uint32_t>> buckets;
  double outside2 = 0.0;
  for (std::uint32_t i : sp.nonzero) {
    const auto loc = locate(cfg, N, r_min, pg.node(i));
    if (loc)
      buckets[*loc].push_back(i);
    else
      outside2 += std::norm(sp.f_N.values[i]) * pg.w_sigma(i);
  }
  const std::size_t nodes = grid.size();
  if (buckets.size() * nodes > (std::size_t(1) << 26))
    throw ValidationError(
        "whitney_reconstruction_check: piece fields would exceed the memory "
        "budget; coarsen r_min or shrink the grid");

  std::map<RegionId, std::vector<cplx>> cur;
  for (const auto& kv : buckets) {
    ExtensionField P = extend(materialize(sp.f_N, kv.second), grid, sp.opts);
    cur.emplace(kv.first, std::move(P.values));
  }

  const int G = N.e - cfg.d - r_min.e;  // top scale with separated partners
  const int g_top = G + cfg.d;          // ancestors at scale N
  std::vector<cplx> S(nodes, cplx{0.0, 0.0});
  std::vector<cplx> U(nodes);
  std::vector<cplx> residual(nodes, cplx{0.0, 0.0});
  std::size_t triple_pairs = 0, near_pairs = 0, far_pairs = 0;

  for (int g = 0; g <= g_top; ++g) {
    if (g > 0) {
      std::map<RegionId, std::vector<cplx>> up;
      for (auto& kv : cur) {
        const RegionId pid = parent(cfg, kv.first);
        auto it = up.find(pid);
        if (it == up.end()) {
          up.emplace(pid, std::move(kv.second));
        } else {
          std::vector<cplx>& dst = it->second;
          for (std::size_t i = 0; i < nodes; ++i) dst[i] += kv.second[i];
        }
      }
      cur = std::move(up);
    }

    if (g <= G) {
      for (const auto& kv : cur) {
        std::fill(U.begin(), U.end(), cplx{0.0, 0.0});
        bool any = false;
        for (const RegionId& pid : separated_partners(cfg, kv.first)) {
          const auto it = cur.find(pid);
          if (it == cur.end()) continue;
          any = true;
          ++triple_pairs;
          for (std::size_t i = 0; i < nodes; ++i) U[i] += it->second[i];
        }
        if (!any) continue;
        for (std::size_t i = 0; i < nodes; ++i) S[i] += kv.second[i] * U[i];
      }
    }

    if (g == cfg.d - 1) {
      // Pairs whose generation-(d-1) ancestors still touch are below the
      // cutoff of every enumerated scale; their products enter here in one
      // grouped block per ancestor pair.
      for (const auto& a : cur) {
        std::fill(U.begin(), U.end(), cplx{0.0, 0.0});
        for (const auto& b : cur) {
          if (!adjacent(cfg, a.first, b.first)) continue;
          ++near_pairs;
          for (std::size_t i = 0; i < nodes; ++i) U[i] += b.second[i];
        }
        for (std::size_t i = 0; i < nodes; ++i)
          residual[i] += a.second[i] * U[i];
      }
    }

    if (g == g_top) {
      // Pairs still non-adjacent at the coarsest scale were never reached by
      // a separated ancestor pair; fold in their complement products.
      std::vector<cplx> total(nodes, cplx{0.0, 0.0});
      for (const auto& kv : cur)
        for (std::size_t i = 0; i < nodes; ++i) total[i] += kv.second[i];
      for (const auto& a : cur) {
        U = total;
        bool all = true;
        for (const auto& b : cur) {
          if (adjacent(cfg, a.first, b.first)) {
            for (std::size_t i = 0; i < nodes; ++i) U[i] -= b.second[i];
          } else {
            all = false;
            ++far_pairs;
          }
        }
        if (all) continue;
        for (std::size_t i = 0; i < nodes; ++i)
          residual[i] += a.second[i] * U[i];
      }
    }
  }
  for (std::size_t i = 0; i < nodes; ++i) S[i] += residual[i];

  ExtensionField Sf = FN;
  Sf.values = std::move(S);
  rep.rhs = std::pow(norm_Lp_spacetime(Sf, 0.5 * p), 0.5 * p);

  ExtensionField Rf = FN;
  Rf.values = std::move(residual);
  const double res_mass = std::pow(norm_Lp_spacetime(Rf, 0.5 * p), 0.5 * p);

  std::ostringstream os;
  os << "pieces=" << buckets.size() << " at r=" << r_min.str()
     << "; separated pairs=" << triple_pairs << ", near=" << near_pairs
     << ", far=" << far_pairs
     << "; residual share=" << (rep.rhs > 0.0 ? res_mass / rep.rhs : 0.0);
  const double outside_share = std::sqrt(outside2) / sp.l2;
  if (outside_share > 0.0) {
    os << "; mass share outside region cover=" << outside_share;
    if (outside_share > 1e-6) rep.unreliable = true;
  }
  rep.witness = os.str();
  finish(rep);
  return rep;
}

void print_report(std::ostream& os, const InequalityReport& rep) {
  char buf[64];
  const auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << key << "=" << buf << "\n";
  };
  put("lhs", rep.lhs);
  put("rhs", rep.rhs);
  put("ratio", rep.ratio);
  os << "witness=" << rep.witness << "\n";
  os << "flags=";
  if (!rep.unreliable && !rep.degenerate) {
    os << "none";
  } else {
    if (rep.unreliable) os << "truncation-suspect";
    if (rep.degenerate) os << (rep.unreliable ? ",degenerate" : "degenerate");
  }
  os << "\n";
}

}  // namespace hyperbolax
