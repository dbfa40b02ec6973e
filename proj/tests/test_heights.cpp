#include <doctest.h>

#include <heightinterp/heights.hpp>

using namespace heightinterp;

namespace {

std::vector<Rational> tup(std::initializer_list<Rational> xs) { return xs; }

struct Rng {
  gmp_randstate_t state;
  Rng() {
    gmp_randinit_mt(state);
    gmp_randseed_ui(state, 7);
  }
  ~Rng() { gmp_randclear(state); }
  Int upto(const Int& b) {
    Int r;
    mpz_urandomm(r.get_mpz_t(), state, Int(b + 1).get_mpz_t());
    return r;
  }
  Rational rational(const Int& mag) {
    Int num = upto(mag), den = upto(mag - 1) + 1;
    if (upto(1) == 1) num = -num;
    return Rational(num, den);
  }
};

}  // namespace

TEST_CASE("make_rational reduces and normalizes") {
  CHECK(make_rational(6, 4) == Rational(3, 2));
  CHECK(make_rational(0, 5) == Rational(0));
  CHECK(make_rational(0, 5).denominator() == 1);
  CHECK(make_rational(-6, -4) == Rational(3, 2));
  CHECK(make_rational(-6, 4).denominator() == 2);
  CHECK_THROWS_AS(make_rational(1, 0), Error);
}

TEST_CASE("rational text form") {
  CHECK(Rational(3, 2).str() == "3/2");
  CHECK(Rational(-7).str() == "-7");
  CHECK(Rational::from_string("6/4") == Rational(3, 2));
  CHECK(Rational::from_string("-2") == Rational(-2));
  CHECK_THROWS_AS(Rational::from_string("a/b"), Error);
}

TEST_CASE("mult_height on singletons and tuples") {
  CHECK(mult_height(Rational(3, 2)).value == 3);
  CHECK(mult_height(Rational(7, 6)).value == 7);
  CHECK(mult_height(Rational(0)).value == 1);
  // least common denominator 21; entries scale to 14, 15, 10
  CHECK(mult_height(tup({Rational(2, 3), Rational(5, 7), Rational(10, 21)})).value == 21);
  CHECK_THROWS_AS(mult_height(std::vector<Rational>{}), Error);
}

TEST_CASE("height comparison relations") {
  CHECK_FALSE(holds_H(tup({Rational(7)}), tup({Rational(1, 2), Rational(3)})));
  CHECK(holds_H(tup({Rational(1)}), tup({Rational(9, 5), Rational(4)})));
  CHECK(holds_H(tup({Rational(5, 3)}), tup({Rational(5, 3)})));

  CHECK(holds_E(tup({Rational(3, 2)}), tup({Rational(3)})));
  CHECK(holds_E(tup({Rational(0)}), tup({Rational(1)})));
  CHECK_FALSE(holds_E(tup({Rational(2)}), tup({Rational(3)})));
}

TEST_CASE("sum-of-heights relation") {
  CHECK(holds_S(Rational(2, 3), Rational(5, 7), Rational(21)));
  CHECK(holds_S(Rational(1), Rational(9, 4), Rational(9, 4)));
  CHECK_FALSE(holds_S(Rational(2), Rational(2), Rational(5)));
}

TEST_CASE("product formula") {
  CHECK(product_formula_check(Rational(-6, 5)));
  CHECK(product_formula_check(Rational(8, 3)));
  CHECK(product_formula_check(Rational(1)));
  CHECK_THROWS_AS(product_formula_check(Rational(0)), Error);
}

TEST_CASE("certified logarithms") {
  CertifiedReal zero = log_height({Int(1)}, Rational(1, 1000));
  CHECK(zero.lo == Rational(0));
  CHECK(zero.hi == Rational(0));

  CertifiedReal l3 = log_height({Int(3)}, Rational(1, 1000));
  CHECK(l3.width() <= Rational(1, 1000));
  // ln 3 = 1.0986122886...: the certified interval pins the first decimals
  CHECK(l3.lo > Rational(10986, 10000));
  CHECK(l3.hi < Rational(10987, 10000));

  CertifiedReal l2 = log_height({Int(2)}, Rational(1, 1000));
  // ln 2 = 0.6931471805...
  CHECK(l2.lo > Rational(6931, 10000));
  CHECK(l2.hi < Rational(6932, 10000));

  SUBCASE("intervals shrink with eps and stay nested") {
    CertifiedReal wide = log_height({Int(123456789)}, Rational(1, 10));
    CertifiedReal tight = log_height({Int(123456789)}, Rational(1, 1000000000));
    CHECK(wide.lo <= tight.lo);
    CHECK(tight.hi <= wide.hi);
    CHECK(tight.width() <= wide.width());
    CHECK(tight.width() <= Rational(1, 1000000000));
  }
}

TEST_CASE("certified log comparisons") {
  CHECK(certified_log_le(Int(7), Int(3), Rational(1)));        // log(7/3) = 0.847
  CHECK_FALSE(certified_log_le(Int(21), Int(3), Rational(1))); // log 7 = 1.94
  CHECK(certified_log_le(Int(5), Int(5), Rational(0)));
  CHECK(certified_log_le(Int(25001), Int(1), Rational(11)));
  CHECK_FALSE(certified_log_le(Int(25001), Int(1), Rational(10)));
}

TEST_CASE("addition-of-heights identity on random pairs") {
  Rng rng;
  const Int mag("1000000000000000000");
  for (int i = 0; i < 1000; ++i) {
    Rational q1 = rng.rational(mag), q2 = rng.rational(mag);
    CHECK(mult_height(q1).value * mult_height(q2).value ==
          mult_height(tup({q1, q2, q1 * q2})).value);
  }
}

TEST_CASE("height totality and singleton shape") {
  Rng rng;
  const Int mag(1000000);
  for (int i = 0; i < 500; ++i) {
    Rational q = rng.rational(mag);
    auto xs = tup({q});
    auto ys = tup({rng.rational(mag)});
    CHECK((holds_H(xs, ys) || holds_H(ys, xs)));
    Int expected = abs(q.numerator()) >= q.denominator() ? abs(q.numerator()) : q.denominator();
    CHECK(mult_height(q).value == expected);
    CHECK(mult_height(q).value >= 1);
  }
}
