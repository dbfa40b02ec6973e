#include <doctest.h>

#include <heightinterp/interp.hpp>

using namespace heightinterp;

namespace {

const Profile& test_profile() {
  static const Profile p = build_profile(30, 10);
  return p;
}

/// Certificate for a prescribed four-squares decomposition (encode always
/// picks the lexicographically largest one).
X4Certificate certificate_for(const std::array<long, 4>& ks, const Profile& profile) {
  X4Certificate c;
  Int q(1);
  for (int j = 0; j < 4; ++j) {
    c.k[j] = ks[j];
    if (ks[j] == 0) {
      c.u[j] = Rational(0);
      c.r[j] = 1;
    } else {
      c.u[j] = pi(gamma_point(ks[j], profile.multiplier));
      c.r[j] = mult_height(c.u[j]).value;
    }
    q *= c.r[j];
  }
  c.q = Rational(q);
  return c;
}

}  // namespace

TEST_CASE("slack analysis reproduces the chain bounds") {
  SlackReport r = slack_analysis(Rational(4));
  REQUIRE(r.constraints.size() == 7);

  auto find = [&r](const std::string& name) -> const SlackConstraint& {
    for (const auto& c : r.constraints)
      if (c.name == name) return c;
    throw std::runtime_error("missing constraint " + name);
  };
  CHECK(find("theta-uniqueness").d_lower_bound == Rational(33));
  CHECK(find("zero-gadget").intermediate == Rational(64));
  CHECK(find("zero-gadget").d_lower_bound == Rational(80));
  CHECK(find("one-gadget").intermediate == Rational(144));
  CHECK(find("one-gadget").d_lower_bound == Rational(160));
  CHECK(find("eq-gadget").intermediate == Rational(160));
  CHECK(find("add-gadget").intermediate == Rational(240));
  CHECK(find("B-gadget").intermediate == Rational(84));
  CHECK(find("B-gadget").d_lower_bound == Rational(100));
  CHECK(find("decode-window").d_lower_bound == Rational(480));
  CHECK(r.b_dec == Rational(240));
  CHECK(r.d_min == Rational(480));
  CHECK(r.d_min < Rational(30000));
  CHECK_THROWS_AS(slack_analysis(Rational(0)), Error);
}

TEST_CASE("profile validation") {
  const Profile& p = test_profile();
  CHECK(p.multiplier == 30);
  CHECK(p.d.lo > Rational(480));
  CHECK(p.d.hi < Rational(680));
  // 900 * 0.7545769... = 679.11921...
  CHECK(p.d.contains(Rational(67911921, 100000)));
  CHECK(p.window >= Rational(4) * p.c_e);
  CHECK(Rational(2) * p.window < p.d.lo);

  CHECK_THROWS_AS(build_profile(5, 1), ProfileError);
  CHECK_THROWS_AS(build_profile(0, 1), Error);
}

TEST_CASE("encode produces the constructive certificates") {
  const Profile& p = test_profile();

  X4Certificate c0 = encode(0, p);
  CHECK(c0.k == std::array<Int, 4>{0, 0, 0, 0});
  CHECK(c0.q == Rational(1));

  X4Certificate c1 = encode(1, p);
  CHECK(c1.k == std::array<Int, 4>{1, 0, 0, 0});
  CHECK(c1.q == Rational(c1.r[0]));
  CHECK(certified_theta_bound(c1.q, 1, p, Rational(4) * p.c_e));

  X4Certificate c7 = encode(7, p);
  CHECK(c7.k == std::array<Int, 4>{2, 1, 1, 1});
  CHECK(certificate_theta(c7) == 7);

  CHECK_THROWS_AS(encode(-1, p), Error);
  CHECK_THROWS_AS(encode(11, p), Error);
}

TEST_CASE("decode inverts encode") {
  const Profile& p = test_profile();
  CHECK(decode(Rational(1), p) == 0);
  for (long m = 0; m <= 10; ++m) {
    X4Certificate c = encode(m, p);
    CHECK(decode(c.q, p) == m);
    CHECK(certified_theta_bound(c.q, m, p, Rational(16)));
  }
}

TEST_CASE("decode rejects values away from every multiple of D") {
  const Profile& p = test_profile();
  // h(2^490) = 339.66..., roughly D/2 away from both 0 and D
  Int far = Int(1) << 490;
  CHECK_THROWS_AS(decode(Rational(far), p), DecodeError);
}

TEST_CASE("theta is independent of the decomposition") {
  const Profile& p = test_profile();
  X4Certificate lex = encode(4, p);                       // (2, 0, 0, 0)
  X4Certificate alt = certificate_for({1, 1, 1, 1}, p);   // 4 = 1+1+1+1
  CHECK(lex.q != alt.q);
  CHECK(decode(lex.q, p) == 4);
  CHECK(decode(alt.q, p) == 4);
}

TEST_CASE("certificate JSON round trip") {
  const Profile& p = test_profile();
  X4Certificate c = encode(7, p);
  X4Certificate back = X4Certificate::from_json(c.to_json());
  CHECK(back.q == c.q);
  CHECK(back.k == c.k);
  CHECK(back.u == c.u);
  CHECK(back.r == c.r);

  Profile q = build_profile(30, 10);
  CHECK(q.to_json() == p.to_json());
}

TEST_CASE("X membership gadget") {
  const Profile& p = test_profile();
  GadgetInstance gx = gadget_X(p);
  CHECK(gx.interface_vars == std::vector<std::string>{"g"});

  CHECK(check_witness(gx.formula, witness_X(0, p)));   // gamma = 0
  CHECK(check_witness(gx.formula, witness_X(1, p)));   // pi(Q_1)
  CHECK(check_witness(gx.formula, witness_X(-2, p)));  // negative multiples too

  SUBCASE("a garbage value is rejected") {
    Assignment w = witness_X(1, p);
    Assignment bad;
    for (const auto& [k, v] : w.values()) bad.set(k, v);
    bad.set("g", Rational(7, 5));
    CHECK_FALSE(check_witness(gx.formula, bad));
  }
}

TEST_CASE("X4 membership with certificates") {
  const Profile& p = test_profile();
  GadgetInstance g4 = gadget_Xn(4, p);

  X4Certificate c1 = encode(1, p);
  CHECK(check_witness(g4.formula, witness_X4(c1, p)));

  X4Certificate c0 = encode(0, p);  // q = 1 via the all-zero chain
  CHECK(check_witness(g4.formula, witness_X4(c0, p)));

  X4Certificate c7 = encode(7, p);
  CHECK(check_witness(g4.formula, witness_X4(c7, p)));

  CHECK_THROWS_AS(gadget_Xn(5, p), Error);

  SUBCASE("X1 contains 0") {
    GadgetInstance g1 = gadget_Xn(1, p);
    FreshNames fresh("x");
    XnPlan plan;
    (void)build_Xn(1, Term::var("q"), p.multiplier, fresh, plan);
    Assignment w;
    w.set("q", Rational(0));
    fill_Xn(plan, Rational(0), {{Int(1), 0}}, p.multiplier, w);
    CHECK(check_witness(g1.formula, w));
  }
}

TEST_CASE("theta-level relation gadgets at small values") {
  const Profile& p = test_profile();
  X4Certificate c0 = encode(0, p), c1 = encode(1, p), c2 = encode(2, p);

  CHECK(check_witness(gadget_zero(p).formula, witness_theta_zero(c0, p)));
  CHECK(check_witness(gadget_one(p).formula, witness_theta_one(c1, p)));
  CHECK(check_witness(gadget_eq(p).formula, witness_theta_eq(c1, c1, p)));
  CHECK(check_witness(gadget_add(p).formula, witness_theta_add(c1, c1, c2, p)));
  CHECK(check_witness(gadget_add(p).formula, witness_theta_add(c0, c1, c1, p)));
  CHECK(check_witness(gadget_B(p).formula, witness_theta_B(c0, c1, p)));

  SUBCASE("witness builders refuse wrong relations") {
    CHECK_THROWS_AS(witness_theta_zero(c1, p), RefusalError);
    CHECK_THROWS_AS(witness_theta_B(c1, c2, p), RefusalError);
  }

  SUBCASE("equality gadget accepts two decompositions of the same value") {
    X4Certificate lex = encode(4, p);
    X4Certificate alt = certificate_for({1, 1, 1, 1}, p);
    CHECK(check_witness(gadget_eq(p).formula, witness_theta_eq(lex, alt, p)));
  }

  SUBCASE("perturbed witnesses are rejected") {
    Assignment w = witness_theta_eq(c1, c1, p);
    w.set("x", c1.q + Rational(1));
    CHECK_FALSE(check_witness(gadget_eq(p).formula, w));
  }
}

TEST_CASE("interpretation gadget formulas round trip") {
  const Profile& p = test_profile();
  for (const auto& g : {gadget_X(p), gadget_Xn(2, p), gadget_zero(p), gadget_B(p)}) {
    CHECK(parse_formula(render(g.formula)) == g.formula);
  }
}
