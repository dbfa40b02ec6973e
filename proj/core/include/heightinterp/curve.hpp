#pragma once

#include <string>

#include "heightinterp/heights.hpp"

namespace heightinterp {

/// Rational point on the curve y^2 = x^3 + 2, or the point at infinity.
class Point {
public:
  Point() : infinite_(true) {}

  static Point infinity() { return Point(); }
  static Point affine(Rational x, Rational y);

  bool is_infinity() const { return infinite_; }
  const Rational& x() const;
  const Rational& y() const;

  Point negated() const;

  /// "inf" or "(a/b, c/d)".
  std::string str() const;
  static Point from_string(const std::string& text);

  friend bool operator==(const Point& p, const Point& q);
  friend bool operator!=(const Point& p, const Point& q) { return !(p == q); }

private:
  Point(Rational x, Rational y) : infinite_(false), x_(std::move(x)), y_(std::move(y)) {}
  bool infinite_;
  Rational x_;
  Rational y_;
};

/// Constants calibrated to y^2 = x^3 + 2: the naive-vs-canonical height gap
/// window, the rounded bound c_E, and the reference decimal for hhat(P1).
struct CurveConstants {
  Rational gap_lower = Rational(-3192, 1000);
  Rational gap_upper = Rational(3384, 1000);
  Rational c_E = Rational(4);
  Rational hhat_P1_reference = Rational(7545769, 10000000);

  static const CurveConstants& get();
};

bool on_curve(const Point& p);

/// Exact chord-tangent group law. Inputs must lie on the curve.
Point add(const Point& p, const Point& q);

/// [n]P by double-and-add; [0]P is infinity, [-n]P = -[n]P.
Point scalar_mul(const Int& n, const Point& p);

/// x-coordinate. Not defined at infinity.
Rational pi(const Point& p);

/// Multiplicative naive height: 1 at infinity, H(pi(P)) otherwise.
MultHeight naive_height(const Point& p);

/// Certified interval for the canonical height hhat(P), from stages j <= k of
/// h_pi([2^j]P)/4^j with the +-c_E correction, all stages intersected.
CertifiedReal canonical_height(const Point& p, int k);

/// The Mordell-Weil generator P1 = (-1, 1).
Point generator();

/// [multiplier*k] P1, memoized per (multiplier, k). Safe for concurrent use.
Point gamma_point(long k, const Int& multiplier);

}  // namespace heightinterp
