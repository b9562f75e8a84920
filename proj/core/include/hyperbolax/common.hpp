#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperbolax {

using Vec = std::vector<double>;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Input that violates a documented precondition (CLI exit code 1).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation that could not meet its numeric contract (CLI exit code 2).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ValidationError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2sq(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(norm2sq(a)); }

inline Vec operator+(Vec a, const Vec& b) {
  if (a.size() != b.size()) throw ValidationError("vec add: dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vec operator-(Vec a, const Vec& b) {
  if (a.size() != b.size()) throw ValidationError("vec sub: dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vec operator*(double c, Vec a) {
  for (double& v : a) v *= c;
  return a;
}

inline Vec operator-(Vec a) {
  for (double& v : a) v = -v;
  return a;
}

}  // namespace hyperbolax
