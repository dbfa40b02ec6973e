#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "heightinterp/errors.hpp"

namespace heightinterp {

using Int = mpz_class;

/// Exact rational, always reduced, denominator >= 1. Zero is 0/1.
class Rational {
public:
  Rational() : v_(0) {}
  Rational(long n) : v_(n) {}
  Rational(const Int& n) : v_(n) {}
  Rational(const Int& num, const Int& den);
  Rational(long num, long den) : Rational(Int(num), Int(den)) {}

  /// Parses the text form "a/b" or "a" (reduced on input).
  static Rational from_string(const std::string& text);

  Int numerator() const { return v_.get_num(); }
  Int denominator() const { return v_.get_den(); }

  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }
  int sign() const { return sgn(v_); }

  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(a.v_ + b.v_); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(a.v_ - b.v_); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(a.v_ * b.v_); }
  friend Rational operator/(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_)); }

  Rational& operator+=(const Rational& b) { v_ += b.v_; return *this; }
  Rational& operator-=(const Rational& b) { v_ -= b.v_; return *this; }
  Rational& operator*=(const Rational& b) { v_ *= b.v_; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

  friend Rational abs(const Rational& a) { return Rational(mpq_class(::abs(a.v_))); }

  const mpq_class& raw() const { return v_; }

private:
  explicit Rational(mpq_class v) : v_(std::move(v)) {}
  mpq_class v_;
};

Rational make_rational(const Int& a, const Int& b);

/// Multiplicative height of a rational tuple: max{d, |d q_1|, ..., |d q_m|}
/// with d the least common denominator. Always >= 1; the logarithmic height
/// is log(value).
struct MultHeight {
  Int value;

  friend bool operator==(const MultHeight& a, const MultHeight& b) { return a.value == b.value; }
  friend bool operator!=(const MultHeight& a, const MultHeight& b) { return a.value != b.value; }
  friend bool operator<=(const MultHeight& a, const MultHeight& b) { return a.value <= b.value; }
  friend bool operator<(const MultHeight& a, const MultHeight& b) { return a.value < b.value; }
};

MultHeight mult_height(const Rational& q);
MultHeight mult_height(const std::vector<Rational>& q);

/// h_m(x) <= h_n(y), decided exactly on multiplicative heights.
bool holds_H(const std::vector<Rational>& x, const std::vector<Rational>& y);
/// h_m(x) == h_n(y).
bool holds_E(const std::vector<Rational>& x, const std::vector<Rational>& y);
/// h(x) + h(y) == h(z), via H(x)*H(y) == H(z).
bool holds_S(const Rational& x, const Rational& y, const Rational& z);

/// Recomputes the height of q from its local absolute values and checks the
/// product formula (the product of all |q|_v is exactly 1). Requires q != 0.
bool product_formula_check(const Rational& q);

/// Closed interval [lo, hi] certified to contain a real number.
struct CertifiedReal {
  Rational lo;
  Rational hi;

  Rational width() const { return hi - lo; }
  bool contains(const Rational& r) const { return lo <= r && r <= hi; }
  bool contains(const CertifiedReal& o) const { return lo <= o.lo && o.hi <= hi; }

  static CertifiedReal point(const Rational& r) { return {r, r}; }

  friend CertifiedReal operator+(const CertifiedReal& a, const CertifiedReal& b) {
    return {a.lo + b.lo, a.hi + b.hi};
  }
  friend CertifiedReal operator-(const CertifiedReal& a, const CertifiedReal& b) {
    return {a.lo - b.hi, a.hi - b.lo};
  }

  /// Scale by a nonnegative rational.
  CertifiedReal scaled(const Rational& c) const;
  CertifiedReal intersect(const CertifiedReal& o) const;

  /// |value| upper bound.
  Rational abs_upper() const;

  /// Certainly <= r / certainly >= r.
  bool surely_le(const Rational& r) const { return hi <= r; }
  bool surely_ge(const Rational& r) const { return lo >= r; }
  /// Certainly > r / certainly < r.
  bool surely_gt(const Rational& r) const { return lo > r; }
  bool surely_lt(const Rational& r) const { return hi < r; }
};

/// Interval of width <= eps containing log(H.value), endpoints dyadic rationals.
CertifiedReal log_height(const MultHeight& h, const Rational& eps);

/// Interval of width <= eps containing log(n) for an integer n >= 1.
CertifiedReal log_interval(const Int& n, const Rational& eps);

/// Decides log(a) - log(b) <= c for integers a,b >= 1 and rational c, refining
/// precision as needed. Exact ties (log(a/b) == c with c != 0 rational) cannot
/// occur; c == 0 is decided exactly.
bool certified_log_le(const Int& a, const Int& b, const Rational& c);

std::size_t hash_value(const Rational& q);

}  // namespace heightinterp

template <>
struct std::hash<heightinterp::Rational> {
  std::size_t operator()(const heightinterp::Rational& q) const { return heightinterp::hash_value(q); }
};
