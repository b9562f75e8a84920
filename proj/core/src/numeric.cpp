#include "hyperbolax/numeric.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace hyperbolax {

const NumericPolicy& policy() {
  static const NumericPolicy p{};
  return p;
}

namespace {

// Newton iteration on Legendre polynomials; standard construction.
GaussRule make_gauss(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // cos-based seeds walk right to left; store ascending.
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss(n)).first;
  return it->second;
}

namespace {

template <typename T>
T gl_panel(const std::function<T(double)>& f, double a, double b, int n) {
  const GaussRule& g = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  T s{};
  for (int i = 0; i < n; ++i) s += g.w[i] * f(mid + half * g.x[i]);
  return half * s;
}

template <typename T>
T adapt(const std::function<T(double)>& f, double a, double b, double tol_abs,
        int depth, int max_depth) {
  T coarse = gl_panel(f, a, b, 10);
  T fine = gl_panel(f, a, 0.5 * (a + b), 10) + gl_panel(f, 0.5 * (a + b), b, 10);
  if (std::abs(fine - coarse) <= tol_abs || depth >= max_depth) return fine;
  return adapt(f, a, 0.5 * (a + b), 0.5 * tol_abs, depth + 1, max_depth) +
         adapt(f, 0.5 * (a + b), b, 0.5 * tol_abs, depth + 1, max_depth);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, int max_depth) {
  double scale = std::abs(gl_panel(f, a, b, 10));
  double tol = rel_tol * std::max(scale, 1e-300);
  for (int pass = 0; pass < 3; ++pass) {
    double v = adapt(f, a, b, tol, 0, max_depth);
    if (std::abs(v) >= scale || std::abs(v) < 1e-300) return v;
    scale = std::abs(v);  // first estimate was too big; tighten and retry
    tol = rel_tol * scale;
  }
  return adapt(f, a, b, tol, 0, max_depth);
}

cplx integrate_adaptive_c(const std::function<cplx(double)>& f, double a,
                          double b, double rel_tol, int max_depth) {
  cplx probe = gl_panel(f, a, b, 10);
  double tol = rel_tol * std::max(std::abs(probe), 1e-300);
  return adapt(f, a, b, tol, 0, max_depth);
}

namespace {

double box_fixed(const std::function<double(const Vec&)>& f, const Vec& lo,
                 const Vec& hi, int n) {
  const GaussRule& g = gauss_legendre(n);
  const std::size_t dim = lo.size();
  Vec pt(dim);
  double total = 0.0;
  std::size_t count = 1;
  for (std::size_t k = 0; k < dim; ++k) count *= n;
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx;
    double w = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      int i = static_cast<int>(rem % n);
      rem /= n;
      pt[k] = 0.5 * (lo[k] + hi[k]) + 0.5 * (hi[k] - lo[k]) * g.x[i];
      w *= 0.5 * (hi[k] - lo[k]) * g.w[i];
    }
    total += w * f(pt);
  }
  return total;
}

}  // namespace

double integrate_box_adaptive(const std::function<double(const Vec&)>& f,
                              const Vec& lo, const Vec& hi, double rel_tol) {
  if (lo.size() != hi.size() || lo.empty() || lo.size() > 3)
    throw ValidationError("integrate_box_adaptive: dimension must be 1..3");
  double prev = box_fixed(f, lo, hi, 8);
  for (int n = 12; n <= 48; n += 8) {
    double cur = box_fixed(f, lo, hi, n);
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300))
      return cur;
    prev = cur;
  }
  // Fall back to one level of panel subdivision along the widest axis.
  std::size_t ax = 0;
  for (std::size_t k = 1; k < lo.size(); ++k)
    if (hi[k] - lo[k] > hi[ax] - lo[ax]) ax = k;
  Vec mid_hi = hi, mid_lo = lo;
  mid_hi[ax] = mid_lo[ax] = 0.5 * (lo[ax] + hi[ax]);
  return integrate_box_adaptive(f, lo, mid_hi, rel_tol) +
         integrate_box_adaptive(f, mid_lo, hi, rel_tol);
}

namespace {

double sphere_fixed(int d, const std::function<double(const Vec&)>& f, int n) {
  if (d == 2) {
    double s = 0.0;
    const int m = 4 * n;
    for (int i = 0; i < m; ++i) {
      double phi = 2.0 * M_PI * i / m;
      s += f({std::cos(phi), std::sin(phi)});
    }
    return s * 2.0 * M_PI / m;
  }
  // d == 3: Gauss-Legendre in cos(theta), trapezoid in phi.
  const GaussRule& g = gauss_legendre(n);
  const int m = 2 * n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double c = g.x[i], sn = std::sqrt(std::max(0.0, 1.0 - c * c));
    double row = 0.0;
    for (int j = 0; j < m; ++j) {
      double phi = 2.0 * M_PI * j / m;
      row += f({sn * std::cos(phi), sn * std::sin(phi), c});
    }
    s += g.w[i] * row * 2.0 * M_PI / m;
  }
  return s;
}

}  // namespace

double integrate_sphere(int d, const std::function<double(const Vec&)>& f,
                        double rel_tol) {
  if (d != 2 && d != 3)
    throw ValidationError("integrate_sphere: only d=2,3 supported");
  double prev = sphere_fixed(d, f, 12);
  for (int n = 24; n <= 480; n *= 2) {
    double cur = sphere_fixed(d, f, n);
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300))
      return cur;
    prev = cur;
  }
  throw NumericalError("integrate_sphere: no convergence at max resolution");
}

double integrate_radial_sphere(int d, const std::function<double(const Vec&)>& f,
                               double r_hint, double rel_tol) {
  auto shell = [&](double a, double b) {
    return integrate_adaptive(
        [&](double rho) {
          if (rho == 0.0) return 0.0;
          double ang = integrate_sphere(
              d,
              [&](const Vec& u) {
                Vec xi = rho * u;
                return f(xi);
              },
              rel_tol * 0.1);
          return std::pow(rho, d - 1) * ang;
        },
        a, b, rel_tol * 0.1);
  };
  double r = std::max(r_hint, 1.0);
  double total = shell(0.0, r);
  for (int k = 0; k < 12; ++k) {
    double extra = shell(r, 2.0 * r);
    total += extra;
    r *= 2.0;
    if (std::abs(extra) <= rel_tol * std::max(std::abs(total), 1e-300))
      return total;
  }
  throw NumericalError("integrate_radial_sphere: tail did not decay");
}

double det_matrix(std::vector<Vec> m) {
  const std::size_t n = m.size();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      double fac = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= fac * m[c][k];
    }
  }
  return det;
}

}  // namespace hyperbolax
