#include <doctest.h>

#include <heightinterp/gadgets.hpp>

using namespace heightinterp;

namespace {

Int sum_sq(const std::array<Int, 4>& ks) {
  Int s(0);
  for (const auto& k : ks) s += k * k;
  return s;
}

struct Rng {
  gmp_randstate_t state;
  Rng() {
    gmp_randinit_mt(state);
    gmp_randseed_ui(state, 11);
  }
  ~Rng() { gmp_randclear(state); }
  Int upto(const Int& b) {
    Int r;
    mpz_urandomm(r.get_mpz_t(), state, Int(b + 1).get_mpz_t());
    return r;
  }
  /// Reduced rational with multiplicative height exactly h.
  Rational with_height(const Int& h) {
    if (h == 1) return Rational(upto(1) == 0 ? 0 : 1);
    for (;;) {
      Int other = upto(h - 1);
      Int g;
      mpz_gcd(g.get_mpz_t(), h.get_mpz_t(), other.get_mpz_t());
      if (g != 1) continue;
      if (other == 0) return Rational(h);
      return upto(1) == 0 ? Rational(h, other) : Rational(other, h);
    }
  }
};

}  // namespace

TEST_CASE("four squares, exhaustive tier") {
  CHECK(four_squares(0) == std::array<Int, 4>{0, 0, 0, 0});
  CHECK(four_squares(7) == std::array<Int, 4>{2, 1, 1, 1});
  CHECK(four_squares(30) == std::array<Int, 4>{5, 2, 1, 0});
  CHECK_THROWS_AS(four_squares(-1), Error);

  Rng rng;
  for (int i = 0; i < 200; ++i) {
    Int n = rng.upto(Int(1000000));
    auto ks = four_squares(n);
    CHECK(sum_sq(ks) == n);
    CHECK(ks[0] >= ks[1]);
    CHECK(ks[1] >= ks[2]);
    CHECK(ks[2] >= ks[3]);
    CHECK(ks[3] >= 0);
  }
}

TEST_CASE("four squares, large tier is deterministic") {
  Int n("123456789012345678901234567890123456789");
  auto a = four_squares(n);
  auto b = four_squares(n);
  CHECK(sum_sq(a) == n);
  CHECK(a == b);
}

TEST_CASE("rational four squares") {
  auto zero = rational_four_squares(Rational(0));
  for (const auto& r : zero) CHECK(r == Rational(0));

  auto half = rational_four_squares(Rational(1, 2));
  CHECK(half == std::array<Rational, 4>{Rational(1, 2), Rational(1, 2), Rational(0), Rational(0)});

  auto sev = rational_four_squares(Rational(7, 9));
  Rational s(0);
  for (const auto& r : sev) s += r * r;
  CHECK(s == Rational(7, 9));

  CHECK_THROWS_AS(rational_four_squares(Rational(-1, 2)), Error);
}

TEST_CASE("J gadget") {
  GadgetInstance j = gadget_J();
  CHECK(j.interface_vars == std::vector<std::string>{"q"});

  CHECK(check_witness(j.formula, witness_J(Rational(3, 2))));
  CHECK(check_witness(j.formula, witness_J(Rational(1))));
  CHECK(check_witness(j.formula, witness_J(Rational(2))));
  CHECK_THROWS_AS(witness_J(Rational(3)), RefusalError);

  SUBCASE("a rejecting assignment for q outside [1,2]") {
    Assignment w = witness_J(Rational(3, 2));
    Assignment bad;
    bad.set("q", Rational(3));
    for (const auto& [k, v] : w.values())
      if (k != "q") bad.set(k, Rational(0));
    CHECK_FALSE(check_witness(j.formula, bad));
  }
}

TEST_CASE("A gadget examples") {
  GadgetInstance a = gadget_A();
  Assignment w87 = witness_A(Rational(8), Rational(7));
  CHECK(check_witness(a.formula, w87));
  // the canonical element of J with height 7
  bool has_q = false;
  for (const auto& [name, value] : w87.values())
    if (value == Rational(7, 6)) has_q = true;
  CHECK(has_q);

  CHECK(check_witness(a.formula, witness_A(Rational(1), Rational(1))));
  CHECK_THROWS_AS(witness_A(Rational(100), Rational(1)), RefusalError);
}

TEST_CASE("A gadget completeness and soundness samples") {
  GadgetInstance a = gadget_A();
  Rng rng;
  for (int i = 0; i < 150; ++i) {
    Int hy = rng.upto(Int(999)) + 1;
    Int hx = rng.upto(Int(2 * hy - 1)) + 1;  // H(x) <= 2 H(y) implies the hypothesis
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    Assignment w = witness_A(x, y);
    CHECK(check_witness(a.formula, w));
    CHECK(height_diff_le(x, y, Rational(2)));
  }
}

TEST_CASE("A^M gadget") {
  CHECK(gadget_AM(1).formula == gadget_A().formula);
  CHECK_THROWS_AS(gadget_AM(0), Error);

  GadgetInstance a2 = gadget_AM(2);
  // the chain binds exactly 2M-1 = 3 intermediate variables
  REQUIRE(a2.formula.kind() == Formula::Kind::Exists);
  CHECK(a2.formula.exists_vars().size() == 3);

  Assignment w = witness_AM(2, Rational(7), Rational(1));
  CHECK(check_witness(a2.formula, w));
  // the canonical chain witness t_j = 2^{2M-j} v at v = 1
  CHECK(*w.find(a2.formula.exists_vars()[0]) == Rational(8));
  CHECK(*w.find(a2.formula.exists_vars()[1]) == Rational(4));
  CHECK(*w.find(a2.formula.exists_vars()[2]) == Rational(2));

  Rng rng;
  for (int m = 2; m <= 4; ++m) {
    GadgetInstance g = gadget_AM(m);
    for (int i = 0; i < 40; ++i) {
      Int hy = rng.upto(Int(999)) + 1;
      Int hx = rng.upto(Int((Int(1) << m) * hy - 1)) + 1;  // 2^M <= e^M
      Rational x = rng.with_height(hx), y = rng.with_height(hy);
      Assignment wit = witness_AM(m, x, y);
      CHECK(check_witness(g.formula, wit));
      CHECK(height_diff_le(x, y, Rational(4 * m)));
    }
  }
}

TEST_CASE("E^M gadget") {
  GadgetInstance e1 = gadget_EM(1);
  CHECK(check_witness(e1.formula, witness_EM(1, Rational(5, 3), Rational(5, 3))));
  CHECK(check_witness(e1.formula, witness_EM(1, Rational(3), Rational(2))));

  Rng rng;
  for (int m = 1; m <= 4; ++m) {
    GadgetInstance g = gadget_EM(m);
    for (int i = 0; i < 30; ++i) {
      Int hy = rng.upto(Int(998)) + 2;
      Int hx = hy / 2 + rng.upto(hy);  // ratio within [1/2, 2]
      if (hx < 1) hx = 1;
      Rational x = rng.with_height(hx), y = rng.with_height(hy);
      Assignment w = witness_EM(m, x, y);
      CHECK(check_witness(g.formula, w));
      CHECK(height_diff_le(x, y, Rational(4 * m)));
      CHECK(height_diff_le(y, x, Rational(4 * m)));
    }
  }
}

TEST_CASE("L gadget") {
  GadgetInstance l = gadget_L();
  Assignment w = witness_L(Rational(1), Rational(1000000));
  CHECK(check_witness(l.formula, w));

  CHECK_THROWS_AS(witness_L(Rational(5), Rational(5)), RefusalError);
  // the constants behind the construction: log(25001) > 10, log(50001) < 11
  CHECK_FALSE(certified_log_le(Int(25001), Int(1), Rational(10)));
  CHECK(certified_log_le(Int(50001), Int(1), Rational(11)));

  Rng rng;
  for (int i = 0; i < 50; ++i) {
    Int hx = rng.upto(Int(999)) + 1;
    Int hy = hx * 59875 + rng.upto(Int(100000));  // e^11 = 59874.1...
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    Assignment wit = witness_L(x, y);
    CHECK(check_witness(l.formula, wit));
    CHECK(height_diff_le(x, y, Rational(-10)));
  }
}

TEST_CASE("constructed J elements at large heights") {
  Int v = nice_height_integer(Int("123456789123456789123456789"));
  JElement e = j_element_with_height(v);
  CHECK(mult_height(e.q).value == v);
  CHECK(e.q >= Rational(1));
  CHECK(e.q <= Rational(2));
  Rational lo(0), hi(0);
  for (int i = 0; i < 4; ++i) {
    lo += e.low[i] * e.low[i];
    hi += e.high[i] * e.high[i];
  }
  CHECK(lo == e.q - Rational(1));
  CHECK(hi == Rational(2) - e.q);
}

TEST_CASE("gadget formulas round trip through the grammar") {
  for (const auto& g : {gadget_J(), gadget_A(), gadget_AM(3), gadget_EM(2), gadget_L()}) {
    CHECK(parse_formula(render(g.formula)) == g.formula);
  }
}
