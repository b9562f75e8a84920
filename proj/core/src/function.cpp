#include "hyperbolax/function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hyperbolax/constants.hpp"
#include "hyperbolax/numeric.hpp"

namespace hyperbolax {

BumpPsi::BumpPsi() : lo(constants().taper_lo), hi(constants().taper_hi) {}

BumpPsi::BumpPsi(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(0.0 < lo && lo < hi))
    throw ValidationError("BumpPsi: need 0 < lo < hi");
}

double BumpPsi::operator()(double rho) const {
  rho = std::abs(rho);
  if (rho <= lo) return 1.0;
  if (rho >= hi) return 0.0;
  const double s = (rho - lo) / (hi - lo);
  return 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double BumpPsi::shell_weight(double rho, Dyadic N) const {
  if (N.e < 0) throw ValidationError("shell_weight: N must be >= 1");
  if (N.e == 0) return (*this)(rho);
  const double n = N.value();
  return (*this)(rho / n) - (*this)(2.0 * rho / n);
}

namespace {

std::string fmt_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string fmt_vec(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_hex(v[i]);
  }
  return out;
}

}  // namespace

SymbolicPtr SymbolicFunction::gaussian(Vec center, double sigma,
                                       cplx amplitude) {
  if (center.empty() || center.size() > 4)
    throw ValidationError("gaussian: dimension must be 1..4");
  if (!(sigma > 0.0)) throw ValidationError("gaussian: sigma must be positive");
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::gaussian;
  f->d_ = int(center.size());
  f->vec_ = std::move(center);
  f->scalar_ = sigma;
  f->coef_ = amplitude;
  return f;
}

SymbolicPtr SymbolicFunction::ball_indicator(int d, double radius) {
  if (d < 1 || d > 4) throw ValidationError("ball_indicator: dimension 1..4");
  if (!(radius > 0.0))
    throw ValidationError("ball_indicator: radius must be positive");
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::ball_indicator;
  f->d_ = d;
  f->scalar_ = radius;
  return f;
}

SymbolicPtr SymbolicFunction::region_indicator(const LatticeConfig& cfg,
                                               const RegionId& id) {
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::region_indicator;
  f->d_ = cfg.d;
  f->cfg_ = cfg;
  f->region_ = make_region(cfg, id);
  return f;
}

SymbolicPtr SymbolicFunction::boosted(SymbolicPtr inner, Vec nu) {
  if (int(nu.size()) != inner->dim())
    throw ValidationError("boosted: boost dimension mismatch");
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::boosted;
  f->d_ = inner->dim();
  f->vec_ = std::move(nu);
  f->kids_ = {std::move(inner)};
  return f;
}

SymbolicPtr SymbolicFunction::modulated(SymbolicPtr inner, Vec x0, double t0) {
  if (int(x0.size()) != inner->dim())
    throw ValidationError("modulated: shift dimension mismatch");
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::modulated;
  f->d_ = inner->dim();
  f->vec_ = std::move(x0);
  f->scalar_ = t0;
  f->kids_ = {std::move(inner)};
  return f;
}

SymbolicPtr SymbolicFunction::scaled(SymbolicPtr inner, cplx c) {
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::scaled;
  f->d_ = inner->dim();
  f->coef_ = c;
  f->kids_ = {std::move(inner)};
  return f;
}

SymbolicPtr SymbolicFunction::sum(std::vector<SymbolicPtr> terms) {
  if (terms.empty()) throw ValidationError("sum: need at least one term");
  for (const auto& t : terms)
    if (t->dim() != terms.front()->dim())
      throw ValidationError("sum: mixed dimensions");
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::sum;
  f->d_ = terms.front()->dim();
  f->kids_ = std::move(terms);
  return f;
}

SymbolicPtr SymbolicFunction::shell_piece(SymbolicPtr inner, Dyadic N) {
  if (N.e < 0) throw ValidationError("shell_piece: N must be >= 1");
  auto f = std::shared_ptr<SymbolicFunction>(new SymbolicFunction);
  f->tag_ = Tag::shell_piece;
  f->d_ = inner->dim();
  f->dyadic_e_ = N.e;
  f->kids_ = {std::move(inner)};
  return f;
}

cplx SymbolicFunction::eval(const Vec& xi) const {
  switch (tag_) {
    case Tag::gaussian: {
      double q = 0.0;
      for (std::size_t i = 0; i < vec_.size(); ++i) {
        const double dxi = xi[i] - vec_[i];
        q += dxi * dxi;
      }
      return coef_ * std::exp(-q / (2.0 * scalar_ * scalar_));
    }
    case Tag::ball_indicator:
      return norm2sq(xi) <= scalar_ * scalar_ ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
    case Tag::region_indicator:
      return region_contains(cfg_, region_, xi) ? cplx{1.0, 0.0}
                                                : cplx{0.0, 0.0};
    case Tag::boosted:
      return kids_[0]->eval(boost_flat(LorentzBoost(vec_), xi));
    case Tag::modulated: {
      const double phase = dot(vec_, xi) + scalar_ * bracket(xi);
      return std::polar(1.0, phase) * kids_[0]->eval(xi);
    }
    case Tag::scaled:
      return coef_ * kids_[0]->eval(xi);
    case Tag::sum: {
      cplx acc{0.0, 0.0};
      for (const auto& k : kids_) acc += k->eval(xi);
      return acc;
    }
    case Tag::shell_piece:
      return BumpPsi{}.shell_weight(norm2(xi), Dyadic{dyadic_e_}) *
             kids_[0]->eval(xi);
  }
  throw ValidationError("symbolic eval: corrupt tag");
}

double SymbolicFunction::support_radius() const {
  switch (tag_) {
    case Tag::gaussian:
      return norm2(vec_) + 8.0 * scalar_;
    case Tag::ball_indicator:
      return scalar_;
    case Tag::region_indicator:
      return region_.radial_hi;
    case Tag::boosted: {
      const double R = kids_[0]->support_radius();
      const double nu = norm2(vec_);
      return std::sqrt(1.0 + nu * nu) * R + nu * std::sqrt(1.0 + R * R);
    }
    case Tag::modulated:
    case Tag::scaled:
      return kids_[0]->support_radius();
    case Tag::sum: {
      double R = 0.0;
      for (const auto& k : kids_) R = std::max(R, k->support_radius());
      return R;
    }
    case Tag::shell_piece:
      return std::min(kids_[0]->support_radius(),
                      constants().taper_hi * Dyadic{dyadic_e_}.value());
  }
  throw ValidationError("symbolic support: corrupt tag");
}

std::string SymbolicFunction::str() const {
  switch (tag_) {
    case Tag::gaussian:
      return "gaussian(" + fmt_vec(vec_) + ";" + fmt_hex(scalar_) + ";" +
             fmt_hex(coef_.real()) + "," + fmt_hex(coef_.imag()) + ")";
    case Tag::ball_indicator:
      return "ball(" + std::to_string(d_) + ";" + fmt_hex(scalar_) + ")";
    case Tag::region_indicator: {
      std::string k;
      for (int i = 0; i < d_ - 1; ++i)
        k += (i ? "," : "") + std::to_string(region_.id.k[i]);
      return "region(" + std::to_string(d_) + ";" + fmt_hex(cfg_.ell) + ";" +
             std::to_string(region_.id.N.e) + ";" +
             std::to_string(region_.id.r.e) + ";" +
             std::to_string(region_.id.j) + ";" + k + ")";
    }
    case Tag::boosted:
      return "boost(" + fmt_vec(vec_) + "){" + kids_[0]->str() + "}";
    case Tag::modulated:
      return "mod(" + fmt_vec(vec_) + ";" + fmt_hex(scalar_) + "){" +
             kids_[0]->str() + "}";
    case Tag::scaled:
      return "scale(" + fmt_hex(coef_.real()) + "," + fmt_hex(coef_.imag()) +
             "){" + kids_[0]->str() + "}";
    case Tag::sum: {
      std::string out = "sum";
      for (const auto& k : kids_) out += "{" + k->str() + "}";
      return out;
    }
    case Tag::shell_piece:
      return "shell(" + std::to_string(dyadic_e_) + "){" + kids_[0]->str() +
             "}";
  }
  throw ValidationError("symbolic str: corrupt tag");
}

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("symbolic parse at offset " + std::to_string(pos) +
                          ": " + why);
  }
  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }
  std::string ident() {
    std::size_t start = pos;
    while (pos < text.size() && std::isalpha((unsigned char)text[pos])) ++pos;
    if (pos == start) fail("expected name");
    return text.substr(start, pos - start);
  }
  double number() {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("expected number");
    pos += std::size_t(end - begin);
    return v;
  }
  Vec numbers_until(char stop) {
    Vec out{number()};
    while (peek() == ',') {
      ++pos;
      out.push_back(number());
    }
    if (peek() != stop) fail("expected list terminator");
    return out;
  }
  SymbolicPtr braced() {
    expect('{');
    SymbolicPtr f = node();
    expect('}');
    return f;
  }

  SymbolicPtr node() {
    const std::string name = ident();
    if (name == "gaussian") {
      expect('(');
      Vec c = numbers_until(';');
      expect(';');
      double sigma = number();
      expect(';');
      double re = number();
      expect(',');
      double im = number();
      expect(')');
      return SymbolicFunction::gaussian(std::move(c), sigma, {re, im});
    }
    if (name == "ball") {
      expect('(');
      int d = int(number());
      expect(';');
      double R = number();
      expect(')');
      return SymbolicFunction::ball_indicator(d, R);
    }
    if (name == "region") {
      expect('(');
      int d = int(number());
      expect(';');
      double ell = number();
      expect(';');
      int Ne = int(number());
      expect(';');
      int re = int(number());
      expect(';');
      int j = int(number());
      expect(';');
      Vec ks = numbers_until(')');
      expect(')');
      if (int(ks.size()) != d - 1) fail("region: wrong index count");
      RegionId id{Dyadic{Ne}, Dyadic{re}, j, {}};
      for (int i = 0; i < d - 1; ++i) id.k[i] = std::int32_t(ks[i]);
      return SymbolicFunction::region_indicator(LatticeConfig(d, ell), id);
    }
    if (name == "boost") {
      expect('(');
      Vec nu = numbers_until(')');
      expect(')');
      return SymbolicFunction::boosted(braced(), std::move(nu));
    }
    if (name == "mod") {
      expect('(');
      Vec x0 = numbers_until(';');
      expect(';');
      double t0 = number();
      expect(')');
      return SymbolicFunction::modulated(braced(), std::move(x0), t0);
    }
    if (name == "scale") {
      expect('(');
      double re = number();
      expect(',');
      double im = number();
      expect(')');
      return SymbolicFunction::scaled(braced(), {re, im});
    }
    if (name == "sum") {
      std::vector<SymbolicPtr> kids;
      while (peek() == '{') kids.push_back(braced());
      return SymbolicFunction::sum(std::move(kids));
    }
    if (name == "shell") {
      expect('(');
      int e = int(number());
      expect(')');
      return SymbolicFunction::shell_piece(braced(), Dyadic{e});
    }
    fail("unknown family " + name);
  }
};

}  // namespace

SymbolicPtr SymbolicFunction::parse(const std::string& text) {
  Parser p{text};
  SymbolicPtr f = p.node();
  if (p.pos != text.size())
    throw ValidationError("symbolic parse: trailing input");
  return f;
}

double symbolic_norm_L2_hyperboloid(const SymbolicFunction& f,
                                    double rel_tol) {
  const int d = f.dim();
  if (d != 2 && d != 3)
    throw ValidationError("symbolic norm: adaptive path supports d in {2,3}");
  const double hint = std::max(1.0, f.support_radius());
  const double sq = integrate_radial_sphere(
      d,
      [&](const Vec& xi) { return std::norm(f.eval(xi)) / bracket(xi); },
      hint, rel_tol);
  return std::sqrt(std::max(0.0, sq));
}

SampledFunction sample(const SymbolicPtr& f,
                       std::shared_ptr<const PolarGrid> grid) {
  if (f->dim() != grid->dim())
    throw ValidationError("sample: function/grid dimension mismatch");
  SampledFunction out;
  out.grid = std::move(grid);
  out.values.resize(out.grid->size());
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = f->eval(out.grid->node(i));
  out.family = f->str();
  return out;
}

double norm_L2_hyperboloid(const SampledFunction& f) {
  double sq = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    sq += std::norm(f.values[i]) * f.w_sigma(i);
  return std::sqrt(sq);
}

double norm_Ls_lebesgue(const SampledFunction& f, double s) {
  if (!(s >= 1.0)) throw ValidationError("lebesgue norm: need s >= 1");
  double acc = 0.0;
  if (s == 2.0) {
    for (std::size_t i = 0; i < f.size(); ++i)
      acc += std::norm(f.values[i]) * f.w_leb(i);
  } else {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double a = std::abs(f.values[i]);
      if (a > 0.0) acc += std::pow(a, s) * f.w_leb(i);
    }
  }
  return std::pow(acc, 1.0 / s);
}

double norm_L2_hyperboloid_ball(const SampledFunction& f, double radius) {
  const PolarGrid& g = *f.grid;
  double sq = 0.0;
  std::size_t i = 0;
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    const bool in = g.rho(ir) <= radius;
    for (std::size_t ia = 0; ia < g.n_angular(); ++ia, ++i)
      if (in) sq += std::norm(f.values[i]) * g.w_sigma(i);
  }
  return std::sqrt(sq);
}

SampledFunction restrict_region(const SampledFunction& f,
                                const LatticeConfig& cfg, const Region& kappa) {
  SampledFunction out = f;
  out.family = "custom";
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!region_contains(cfg, kappa, f.grid->node(i)))
      out.values[i] = {0.0, 0.0};
  return out;
}

SampledFunction angular_piece(const SampledFunction& f, int k, int K) {
  const int d = f.grid->dim();
  if (K != (1 << d))
    throw ValidationError("angular_piece: the fixed partition has 2^d cells");
  if (k < 1 || k > K) throw ValidationError("angular_piece: cell out of range");
  SampledFunction out = f;
  out.family = "custom";
  const PolarGrid& g = *f.grid;
  std::size_t i = 0;
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    for (std::size_t ia = 0; ia < g.n_angular(); ++ia, ++i) {
      const Vec& dir = g.direction(ia);
      int cell = 0;
      for (int a = 0; a < d; ++a)
        if (dir[a] < 0.0) cell |= 1 << a;
      if (cell != k - 1) out.values[i] = {0.0, 0.0};
    }
  }
  return out;
}

SampledFunction lp_piece(const SampledFunction& f, Dyadic N) {
  const BumpPsi psi;
  SampledFunction out = f;
  out.family = "custom";
  const PolarGrid& g = *f.grid;
  std::size_t i = 0;
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    const double w = psi.shell_weight(g.rho(ir), N);
    for (std::size_t ia = 0; ia < g.n_angular(); ++ia, ++i) out.values[i] *= w;
  }
  return out;
}

SampledFunction pullback_boost(const SampledFunction& f, const Vec& nu) {
  if (int(nu.size()) != f.grid->dim())
    throw ValidationError("pullback_boost: dimension mismatch");
  const LorentzBoost L(nu);
  SampledFunction out;
  out.grid = f.grid;
  out.family = "custom";
  out.values.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    out.values[i] = f.grid->interpolate(f.values, boost_flat(L, f.grid->node(i)),
                                        &out.pullback_outside);
  return out;
}

SampledFunction modulate(const SampledFunction& f, const Vec& x0, double t0) {
  if (int(x0.size()) != f.grid->dim())
    throw ValidationError("modulate: dimension mismatch");
  SampledFunction out = f;
  out.family = "custom";
  const PolarGrid& g = *f.grid;
  std::size_t i = 0;
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    const double rho = g.rho(ir);
    const double tphase = t0 * std::sqrt(1.0 + rho * rho);
    for (std::size_t ia = 0; ia < g.n_angular(); ++ia, ++i) {
      const double phase = rho * dot(x0, g.direction(ia)) + tphase;
      out.values[i] *= std::polar(1.0, phase);
    }
  }
  return out;
}

SampledFunction operator+(const SampledFunction& a, const SampledFunction& b) {
  if (a.grid != b.grid && !(a.grid->spec() == b.grid->spec()))
    throw ValidationError("function add: grids differ");
  SampledFunction out = a;
  out.family = "custom";
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += b.values[i];
  out.pullback_outside = a.pullback_outside + b.pullback_outside;
  return out;
}

SampledFunction operator*(cplx c, SampledFunction f) {
  for (auto& v : f.values) v *= c;
  return f;
}

void save_function(std::ostream& os, const SampledFunction& f) {
  os << "# hyperbolax-function v1\n";
  os << "constants " << constants().version << "\n";
  os << "family " << f.family << "\n";
  os << "grid " << f.grid->spec().str() << "\n";
  os << "pullback_outside " << f.pullback_outside << "\n";
  os << "values " << f.values.size() << "\n";
  for (std::size_t i = 0; i < f.values.size(); ++i)
    os << i << " " << fmt_hex(f.values[i].real()) << " "
       << fmt_hex(f.values[i].imag()) << "\n";
}

SampledFunction load_function(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# hyperbolax-function", 0) != 0)
    throw ValidationError("function load: bad magic line");
  SampledFunction out;
  std::size_t count = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "constants") {
      // informational; version pinning enforced by sweep aggregation
    } else if (key == "family") {
      out.family = line.substr(std::string("family ").size());
    } else if (key == "grid") {
      out.grid = std::make_shared<PolarGrid>(
          PolarGridSpec::parse(line.substr(std::string("grid ").size())));
    } else if (key == "pullback_outside") {
      ls >> out.pullback_outside;
    } else if (key == "values") {
      ls >> count;
      break;
    } else {
      throw ValidationError("function load: unknown header " + key);
    }
  }
  if (!out.grid) throw ValidationError("function load: missing grid");
  if (count != out.grid->size())
    throw ValidationError("function load: value count mismatches grid");
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line))
      throw ValidationError("function load: truncated records");
    std::istringstream ls(line);
    std::size_t idx = 0;
    std::string re, im;
    ls >> idx >> re >> im;
    if (idx != i) throw ValidationError("function load: record out of order");
    out.values[i] = {std::strtod(re.c_str(), nullptr),
                     std::strtod(im.c_str(), nullptr)};
  }
  return out;
}

}  // namespace hyperbolax
