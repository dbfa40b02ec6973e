#include <doctest.h>

#include <heightinterp/curve.hpp>

using namespace heightinterp;

TEST_CASE("curve membership") {
  CHECK(on_curve(generator()));
  CHECK(on_curve(Point::infinity()));
  CHECK_FALSE(on_curve(Point::affine(Rational(0), Rational(1))));
  CHECK(generator() == Point::affine(Rational(-1), Rational(1)));
}

TEST_CASE("group law on known multiples") {
  Point p1 = generator();
  Point p2 = add(p1, p1);
  CHECK(p2 == Point::affine(Rational(17, 4), Rational(-71, 8)));
  CHECK(on_curve(p2));

  CHECK(add(p2, Point::infinity()) == p2);
  CHECK(add(p2, p2.negated()) == Point::infinity());

  Point p3 = scalar_mul(3, p1);
  CHECK(p3 == Point::affine(Rational(127, 441), Rational(13175, 9261)));
  CHECK(p3.x().denominator() == 21 * 21);
  CHECK(p3.y().denominator() == 21 * 21 * 21);

  CHECK(scalar_mul(0, p1) == Point::infinity());
  CHECK(scalar_mul(-2, p1) == p2.negated());
  CHECK_THROWS_AS(add(Point::affine(Rational(0), Rational(1)), p1), Error);
}

TEST_CASE("x-coordinate morphism and naive height") {
  CHECK(pi(generator()) == Rational(-1));
  CHECK(pi(scalar_mul(2, generator())) == Rational(17, 4));
  CHECK_THROWS_AS(pi(Point::infinity()), Error);

  CHECK(naive_height(Point::infinity()).value == 1);
  CHECK(naive_height(generator()).value == 1);
  CHECK(naive_height(scalar_mul(2, generator())).value == 17);
}

TEST_CASE("point serialization") {
  Point p2 = scalar_mul(2, generator());
  CHECK(p2.str() == "(17/4, -71/8)");
  CHECK(Point::from_string("(17/4, -71/8)") == p2);
  CHECK(Point::from_string("inf") == Point::infinity());
  CHECK(Point::infinity().str() == "inf");
}

TEST_CASE("canonical height certification") {
  CHECK(canonical_height(Point::infinity(), 3).lo == Rational(0));
  CHECK(canonical_height(Point::infinity(), 3).hi == Rational(0));

  const Rational reference = CurveConstants::get().hhat_P1_reference;
  CertifiedReal h6 = canonical_height(generator(), 6);
  CHECK(h6.width() < Rational(1, 100));
  CHECK(h6.contains(reference));

  SUBCASE("stages nest") {
    CertifiedReal h4 = canonical_height(generator(), 4);
    CHECK(h4.lo <= h6.lo);
    CHECK(h6.hi <= h4.hi);
  }

  SUBCASE("quadratic scaling against multiples") {
    CertifiedReal h2 = canonical_height(scalar_mul(2, generator()), 6);
    CertifiedReal four_h1 = canonical_height(generator(), 8).scaled(Rational(4));
    // both intervals contain hhat([2]P1), so they overlap
    CHECK(h2.lo <= four_h1.hi);
    CHECK(four_h1.lo <= h2.hi);
  }
}

TEST_CASE("gap window on small multiples") {
  const CurveConstants& cc = CurveConstants::get();
  CertifiedReal hh = canonical_height(generator(), 10);
  for (long k = 1; k <= 6; ++k) {
    CertifiedReal gap = hh.scaled(Rational(k * k)) -
                        log_height(naive_height(scalar_mul(k, generator())), Rational(1, 100000));
    CHECK(gap.lo > cc.gap_lower);
    CHECK(gap.hi < cc.gap_upper);
  }
}

TEST_CASE("gamma points") {
  CHECK(gamma_point(0, 2) == Point::infinity());
  CHECK(gamma_point(1, 2) == Point::affine(Rational(17, 4), Rational(-71, 8)));
  CHECK(gamma_point(-1, 2) == Point::affine(Rational(17, 4), Rational(71, 8)));
  CHECK(gamma_point(3, 5) == scalar_mul(15, generator()));
  CHECK_THROWS_AS(gamma_point(1, 0), Error);
}

TEST_CASE("group axioms on sampled combinations") {
  std::vector<Point> pts;
  for (long a = -8; a <= 8; ++a) pts.push_back(scalar_mul(a, generator()));
  auto at = [&pts](long a) { return pts[static_cast<std::size_t>(a + 8)]; };

  for (long a = -8; a <= 8; a += 3) {
    for (long b = -7; b <= 8; b += 4) {
      CHECK(add(at(a), at(b)) == add(at(b), at(a)));
      CHECK(add(at(a), at(b)) == scalar_mul(a + b, generator()));
      for (long c = -6; c <= 8; c += 5) {
        CHECK(add(add(at(a), at(b)), at(c)) == add(at(a), add(at(b), at(c))));
      }
    }
  }

  SUBCASE("scalar multiplication composes") {
    for (long m = -4; m <= 4; ++m)
      for (long n = -3; n <= 3; ++n)
        CHECK(scalar_mul(m, scalar_mul(n, generator())) == scalar_mul(m * n, generator()));
  }
}
