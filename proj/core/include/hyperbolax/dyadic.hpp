#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "hyperbolax/common.hpp"

namespace hyperbolax {

// Exact dyadic scale 2^e. All shell and cap scales in the lattice are pure
// powers of two, so arithmetic on them is integer arithmetic on exponents.
struct Dyadic {
  int e = 0;

  static Dyadic from_exponent(int e_) { return Dyadic{e_}; }

  static Dyadic from_double(double v) {
    if (!(v > 0.0) || std::isinf(v)) throw ValidationError("dyadic: value must be a positive power of two");
    int e_ = 0;
    double m = std::frexp(v, &e_);  // v = m * 2^e, m in [0.5, 1)
    if (m != 0.5) throw ValidationError("dyadic: " + std::to_string(v) + " is not a power of two");
    return Dyadic{e_ - 1};
  }

  double value() const { return std::ldexp(1.0, e); }

  friend Dyadic operator*(Dyadic a, Dyadic b) { return Dyadic{a.e + b.e}; }
  friend Dyadic operator/(Dyadic a, Dyadic b) { return Dyadic{a.e - b.e}; }
  friend bool operator==(Dyadic a, Dyadic b) { return a.e == b.e; }
  friend bool operator!=(Dyadic a, Dyadic b) { return a.e != b.e; }
  friend bool operator<(Dyadic a, Dyadic b) { return a.e < b.e; }
  friend bool operator<=(Dyadic a, Dyadic b) { return a.e <= b.e; }
  friend bool operator>(Dyadic a, Dyadic b) { return a.e > b.e; }
  friend bool operator>=(Dyadic a, Dyadic b) { return a.e >= b.e; }

  std::string str() const {
    if (e >= 0) return std::to_string(std::int64_t(1) << e);
    return "1/" + std::to_string(std::int64_t(1) << (-e));
  }
};

}  // namespace hyperbolax
