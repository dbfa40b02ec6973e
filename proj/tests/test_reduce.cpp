#include <doctest.h>

#include <heightinterp/reduce.hpp>

using namespace heightinterp;

namespace {

const Profile& test_profile() {
  static const Profile p = build_profile(30, 10);
  return p;
}

NatFormula nat(const std::string& text) { return parse_nat_formula(text); }

/// 1 + 1 + ... + 1 (n ones), balanced; keeps eliminate_mul away from the
/// multiplications hiding in binary literal expansions.
Term unary(long n) {
  if (n == 0) return Term::zero();
  std::vector<Term> ones(static_cast<std::size_t>(n), Term::one());
  while (ones.size() > 1) {
    std::vector<Term> next;
    for (std::size_t i = 0; i + 1 < ones.size(); i += 2)
      next.push_back(Term::add(ones[i], ones[i + 1]));
    if (ones.size() % 2) next.push_back(ones.back());
    ones = std::move(next);
  }
  return ones[0];
}

}  // namespace

TEST_CASE("nat formula parse and render") {
  NatFormula f = nat("(exists (x) (and (B x (+ x 1)) (= x 0)))");
  CHECK(render(f) == "(exists (x) (and (B x (+ x 1)) (= x 0)))");
  CHECK(parse_nat_formula(render(f)) == f);
  CHECK(nat_free_vars(f).empty());
  CHECK(nat_free_vars(nat("(= x y)")) == std::set<std::string>{"x", "y"});
  CHECK_THROWS_AS(nat("(H 1 1 (x) (y))"), ParseError);
}

TEST_CASE("bounded evaluation over N") {
  CHECK(nat_eval(nat("(exists (x) (= (+ x x) (+ 1 1)))"), 5));
  CHECK_FALSE(nat_eval(nat("(= 1 0)"), 5));
  CHECK(nat_eval(nat("(B (+ (+ 1 1) (+ 1 1)) (+ (+ (+ 1 1) (+ 1 1)) (+ (+ 1 1) (+ (+ 1 1) 1))))"),
                 0));  // B(4, 9), no search needed
  CHECK_FALSE(nat_eval(nat("(B (+ (+ 1 1) (+ 1 1)) (+ (+ (+ 1 1) (+ 1 1)) (+ 1 1)))"), 0));
  CHECK_FALSE(nat_eval(nat("(exists (x) (= (+ x x) (+ (+ 1 1) 1)))"), 20));  // 2x = 3
  CHECK_THROWS_AS(nat_eval(nat("(= x 0)"), 3), Error);  // free variable

  SUBCASE("pinned variables may exceed the search bound") {
    CHECK(nat_eval(nat("(exists (z) (= z (* (+ (+ 1 1) 1) (+ (+ 1 1) 1))))"), 2));
  }
  SUBCASE("substitution semantics") {
    NatAssignment a{{"x", Int(3)}};
    CHECK(nat_check(nat("(exists (x) (= (+ x x) (+ (+ (+ 1 1) (+ 1 1)) (+ 1 1))))"), a));
    CHECK_FALSE(nat_check(nat("(= x 0)"), a));
    CHECK_THROWS_AS(nat_check(nat("(= y 0)"), a), WitnessError);
  }
}

TEST_CASE("multiplication elimination") {
  SUBCASE("x-free formulas come back unchanged") {
    NatFormula f = nat("(exists (x) (and (= (+ x 1) (+ 1 1)) (B x 1)))");
    CHECK(eliminate_mul(f) == f);
  }

  SUBCASE("sigma instance: 3^2 = 9 through B(9, 16)") {
    NatFormula good = NatFormula::eq(Term::mul(unary(3), unary(3)), unary(9));
    NatFormula bad = NatFormula::eq(Term::mul(unary(3), unary(3)), unary(10));
    CHECK(nat_eval(eliminate_mul(good), 40));
    CHECK_FALSE(nat_eval(eliminate_mul(bad), 40));
  }

  SUBCASE("x*y = z at (2, 3, 6): u=4, v=9, w=25") {
    NatFormula f = NatFormula::eq(Term::mul(unary(2), unary(3)), unary(6));
    NatFormula e = eliminate_mul(f);
    CHECK(f != e);
    CHECK(nat_eval(e, 26));
  }

  SUBCASE("oracle equivalence on a small grid") {
    for (long x = 0; x <= 12; ++x) {
      for (long y = 0; y <= 12; y += 3) {
        NatFormula f = NatFormula::eq(Term::mul(unary(x), unary(y)), unary(x * y));
        NatFormula wrong = NatFormula::eq(Term::mul(unary(x), unary(y)), unary(x * y + 1));
        Int bound((x + y) * (x + y) + 3);
        CHECK(nat_eval(eliminate_mul(f), bound));
        CHECK_FALSE(nat_eval(eliminate_mul(wrong), bound));
      }
    }
  }
}

TEST_CASE("compilation structure") {
  const Profile& p = test_profile();
  CompileOutput out = compile(nat("(= 1 0)"), p);  // compilation is total
  CHECK(free_vars(out.sentence).empty());
  CHECK(out.var_map.empty());
  CHECK(!out.inventory.empty());

  CompileOutput with_vars = compile(nat("(exists (x) (= x 0))"), p);
  CHECK(with_vars.var_map.count("x") == 1);
  CHECK(free_vars(with_vars.sentence).empty());
  CHECK(parse_formula(render(with_vars.sentence)) == with_vars.sentence);

  SUBCASE("free variables are mapped and relativized") {
    CompileOutput free_out = compile(nat("(= x 0)"), p);
    CHECK(free_out.var_map.count("x") == 1);
    CHECK(free_vars(free_out.sentence) ==
          std::set<std::string>{free_out.var_map.at("x")});
  }

  SUBCASE("shadowing and reserved names are rejected") {
    CHECK_THROWS_AS(compile(nat("(exists (x) (exists (x) (= x 0)))"), p), Error);
    CHECK_THROWS_AS(compile(nat("(exists (_t) (= _t 0))"), p), Error);
  }
}

TEST_CASE("witness round trip on small sentences") {
  const Profile& p = test_profile();

  SUBCASE("exists x: x = 0") {
    CompileOutput out = compile(nat("(exists (x) (= x 0))"), p);
    NatAssignment a{{"x", Int(0)}};
    Assignment w = witness_up(out, a, p);
    CHECK(check_witness(out.sentence, w));
    // x maps to the canonical encoding of 0, which is 1
    CHECK(*w.find(out.var_map.at("x")) == Rational(1));
    NatAssignment back = witness_down(w, out, p);
    CHECK(back.at("x") == 0);
  }

  SUBCASE("exists x: x + x = 2") {
    CompileOutput out = compile(nat("(exists (x) (= (+ x x) (+ 1 1)))"), p);
    NatAssignment a{{"x", Int(1)}};
    Assignment w = witness_up(out, a, p);
    CHECK(check_witness(out.sentence, w));
    CHECK(witness_down(w, out, p).at("x") == 1);
  }

  SUBCASE("disjunction picks a satisfied branch") {
    CompileOutput out = compile(nat("(exists (x) (or (= x 1) (= x (+ 1 1))))"), p);
    NatAssignment a{{"x", Int(2)}};
    Assignment w = witness_up(out, a, p);
    CHECK(check_witness(out.sentence, w));
    CHECK(witness_down(w, out, p).at("x") == 2);
  }

  SUBCASE("refusals") {
    CompileOutput out = compile(nat("(exists (x) (= x 0))"), p);
    CHECK_THROWS_AS(witness_up(out, NatAssignment{{"x", Int(1)}}, p), RefusalError);
    CHECK_THROWS_AS(witness_up(out, NatAssignment{{"x", Int(100)}}, p), Error);
  }

  SUBCASE("perturbed witnesses are rejected") {
    CompileOutput out = compile(nat("(exists (x) (= x 0))"), p);
    Assignment w = witness_up(out, NatAssignment{{"x", Int(0)}}, p);
    Assignment bad = w;
    bad.set(out.var_map.at("x"), Rational(7));
    CHECK_FALSE(check_witness(out.sentence, bad));
    CHECK_THROWS_AS(witness_down(bad, out, p), WitnessError);
  }
}

TEST_CASE("compile output JSON carries source, sentence and map") {
  const Profile& p = test_profile();
  CompileOutput out = compile(nat("(exists (x) (= x 1))"), p);
  std::string j = out.to_json();
  CHECK(j.find("\"source\"") != std::string::npos);
  CHECK(j.find("\"sentence\"") != std::string::npos);
  CHECK(j.find("\"var_map\"") != std::string::npos);
}
