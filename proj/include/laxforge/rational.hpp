// Exact Gaussian-rational coefficients. All expression arithmetic is exact;
// the zero test below is what every symbolic identity in the engine rests on.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace laxforge {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A requested operation is outside the engine's supported fragment.
struct unsupported_error : error {
  using error::error;
};
// Expression blow-up guard tripped.
struct resource_error : error {
  using error::error;
};
// Bad user input (CLI / config / fixture files).
struct usage_error : error {
  using error::error;
};

/// Complex number with exact rational real and imaginary parts.
struct GaussRat {
  BigRat re{0};
  BigRat im{0};

  GaussRat() = default;
  GaussRat(long long n) : re(n) {}
  GaussRat(BigRat r) : re(std::move(r)) {}
  GaussRat(BigRat r, BigRat i) : re(std::move(r)), im(std::move(i)) {}

  static GaussRat i() { return GaussRat(BigRat(0), BigRat(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_one() const { return re == 1 && im == 0; }
  bool is_real() const { return im == 0; }

  GaussRat operator-() const { return {-re, -im}; }
  GaussRat conj() const { return {re, -im}; }

  friend GaussRat operator+(const GaussRat& a, const GaussRat& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussRat operator-(const GaussRat& a, const GaussRat& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussRat operator*(const GaussRat& a, const GaussRat& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  GaussRat inverse() const {
    BigRat n = re * re + im * im;
    if (n == 0) throw error("division by zero coefficient");
    return {re / n, -im / n};
  }
  friend GaussRat operator/(const GaussRat& a, const GaussRat& b) {
    return a * b.inverse();
  }
  friend bool operator==(const GaussRat& a, const GaussRat& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const GaussRat& a, const GaussRat& b) { return !(a == b); }

  GaussRat pow(int n) const {
    if (n < 0) return inverse().pow(-n);
    GaussRat acc(1), base = *this;
    while (n) {
      if (n & 1) acc = acc * base;
      base = base * base;
      n >>= 1;
    }
    return acc;
  }

  static std::string rat_str(const BigRat& r) { return r.str(); }

  /// Deterministic plain-text form, e.g. "3/2", "-i", "(1+2i)".
  std::string str() const {
    if (im == 0) return rat_str(re);
    std::string imeq;
    if (im == 1)
      imeq = "i";
    else if (im == -1)
      imeq = "-i";
    else
      imeq = rat_str(im) + "*i";
    if (re == 0) return imeq;
    std::string s = "(" + rat_str(re);
    s += (im > 0 ? "+" : "-");
    if (im == 1 || im == -1)
      s += "i";
    else
      s += rat_str(boost::multiprecision::abs(im)) + "*i";
    return s + ")";
  }
};

inline BigRat parse_bigrat(const std::string& s) {
  try {
    return BigRat(s);
  } catch (const std::exception&) {
    throw usage_error("bad rational literal: " + s);
  }
}

}  // namespace laxforge
