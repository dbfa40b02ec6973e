#include "suites.hpp"

#include <gmpxx.h>

#include <functional>

namespace heightinterp::suites {

namespace {

class Rng {
public:
  explicit Rng(unsigned long seed) {
    gmp_randinit_mt(state_);
    gmp_randseed_ui(state_, seed);
  }
  ~Rng() { gmp_randclear(state_); }

  Int upto(const Int& bound) {  // uniform in [0, bound]
    Int r;
    mpz_urandomm(r.get_mpz_t(), state_, Int(bound + 1).get_mpz_t());
    return r;
  }

  Int in(long lo, const Int& hi) { return Int(lo) + upto(hi - lo); }

  Rational rational(const Int& magnitude) {
    Int num = upto(magnitude);
    Int den = in(1, magnitude);
    if (upto(1) == 1) num = -num;
    return Rational(num, den);
  }

  /// Reduced rational with multiplicative height exactly h >= 1.
  Rational with_height(const Int& h) {
    if (h == 1) return upto(1) == 0 ? Rational(0) : Rational(upto(1) == 0 ? 1 : -1);
    for (;;) {
      Int other = upto(h - 1);
      Int g;
      mpz_gcd(g.get_mpz_t(), h.get_mpz_t(), other.get_mpz_t());
      if (g != 1) continue;
      Int num = h, den = other;
      if (other != 0 && upto(1) == 0) std::swap(num, den);
      if (den == 0) den = 1;
      if (upto(1) == 1) num = -num;
      return Rational(num, den);
    }
  }

private:
  gmp_randstate_t state_;
};

SuiteResult check_all(const std::string& name, long n, const std::function<bool(long)>& body) {
  SuiteResult r{name, true, n, ""};
  for (long i = 0; i < n; ++i) {
    if (!body(i)) {
      r.passed = false;
      r.detail = "failed at sample " + std::to_string(i);
      break;
    }
  }
  return r;
}

}  // namespace

std::vector<SuiteResult> run_heights(long samples) {
  std::vector<SuiteResult> out;
  Rng rng(20240811);
  const Int big("1000000000000000000");

  out.push_back(check_all("addition-of-heights", samples, [&](long) {
    Rational q1 = rng.rational(big), q2 = rng.rational(big);
    return mult_height(q1).value * mult_height(q2).value ==
           mult_height(std::vector<Rational>{q1, q2, q1 * q2}).value;
  }));

  out.push_back(check_all("comparison-totality", samples / 10 + 1, [&](long) {
    std::vector<Rational> x{rng.rational(big), rng.rational(big)};
    std::vector<Rational> y{rng.rational(big)};
    return (holds_H(x, y) || holds_H(y, x)) && holds_E(x, x) &&
           (holds_E(x, y) == holds_E(y, x));
  }));

  out.push_back(check_all("sum-relation", samples / 10 + 1, [&](long) {
    Rational x = rng.rational(big), y = rng.rational(big);
    Int product = mult_height(x).value * mult_height(y).value;
    return holds_S(x, y, Rational(product)) ||
           mult_height(Rational(product)).value != product;
  }));

  out.push_back(check_all("product-formula", samples / 100 + 1, [&](long) {
    Rational q = rng.rational(Int(1000000000));
    if (q.is_zero()) q = Rational(1);
    return product_formula_check(q);
  }));

  out.push_back(check_all("log-height-certified", 50, [&](long i) {
    Int h = rng.in(1, Int(1000000)) + i;
    CertifiedReal wide = log_height({h}, Rational(1, 100));
    CertifiedReal tight = log_height({h}, Rational(1, 1000000));
    return wide.lo <= tight.lo && tight.hi <= wide.hi && tight.width() <= wide.width();
  }));
  return out;
}

std::vector<SuiteResult> run_curve(int range) {
  std::vector<SuiteResult> out;
  Rng rng(20240812);
  const CurveConstants& cc = CurveConstants::get();

  out.push_back(check_all("group-axioms", 100, [&](long) {
    long a = mpz_get_si(rng.in(-8, Int(8)).get_mpz_t());
    long b = mpz_get_si(rng.in(-8, Int(8)).get_mpz_t());
    long c = mpz_get_si(rng.in(-8, Int(8)).get_mpz_t());
    Point pa = scalar_mul(a, generator());
    Point pb = scalar_mul(b, generator());
    Point pc = scalar_mul(c, generator());
    if (add(pa, pb) != add(pb, pa)) return false;
    if (add(pa, Point::infinity()) != pa) return false;
    if (add(pa, pa.negated()) != Point::infinity()) return false;
    return add(add(pa, pb), pc) == add(pa, add(pb, pc));
  }));

  out.push_back(check_all("on-curve-closure", 50, [&](long) {
    long a = mpz_get_si(rng.in(-6, Int(6)).get_mpz_t());
    long b = mpz_get_si(rng.in(-6, Int(6)).get_mpz_t());
    Point s = add(scalar_mul(a, generator()), scalar_mul(b, generator()));
    return on_curve(s) && s == scalar_mul(a + b, generator());
  }));

  out.push_back(check_all("scalar-composition", 30, [&](long) {
    long m = mpz_get_si(rng.in(-5, Int(5)).get_mpz_t());
    long n = mpz_get_si(rng.in(-5, Int(5)).get_mpz_t());
    return scalar_mul(m, scalar_mul(n, generator())) == scalar_mul(m * n, generator());
  }));

  out.push_back(check_all("height-gap-window", range, [&](long i) {
    long k = i + 1;
    CertifiedReal hh = canonical_height(generator(), 12);
    CertifiedReal khh = hh.scaled(Rational(k * k));
    CertifiedReal naive = log_height(naive_height(scalar_mul(k, generator())), Rational(1, 1000000));
    CertifiedReal gap = khh - naive;
    return gap.lo > cc.gap_lower && gap.hi < cc.gap_upper;
  }));

  out.push_back(check_all("canonical-height-reference", 1, [&](long) {
    CertifiedReal h8 = canonical_height(generator(), 8);
    CertifiedReal h10 = canonical_height(generator(), 10);
    return h8.contains(cc.hhat_P1_reference) && h10.contains(cc.hhat_P1_reference) &&
           h8.lo <= h10.lo && h10.hi <= h8.hi;
  }));
  return out;
}

std::vector<SuiteResult> run_gadgets(long samples) {
  std::vector<SuiteResult> out;
  Rng rng(20240813);
  const Int cap(1000);

  out.push_back(check_all("four-squares", samples, [&](long i) {
    Int n = rng.upto(Int(1000000)) + i;
    auto ks = four_squares(n);
    Int sum(0);
    for (const auto& k : ks) sum += k * k;
    return sum == n && ks[0] >= ks[1] && ks[1] >= ks[2] && ks[2] >= ks[3] && ks[3] >= 0;
  }));

  out.push_back(check_all("rational-four-squares", samples / 10 + 1, [&](long) {
    Rational q = abs(rng.rational(Int(100000)));
    auto rs = rational_four_squares(q);
    Rational sum(0);
    for (const auto& r : rs) sum += r * r;
    return sum == q;
  }));

  auto ga = gadget_A();
  out.push_back(check_all("A-complete-and-sound", samples, [&](long) {
    Int hy = rng.in(1, cap);
    // h(x) <= h(y) + 1 guaranteed when H(x) <= 2 H(y)
    Int hx = rng.in(1, Int(2 * hy));
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    Assignment w = witness_A(x, y);
    if (!check_witness(ga.formula, w)) return false;
    return height_diff_le(x, y, Rational(2));
  }));

  out.push_back(check_all("AM-complete-and-sound", samples / 4 + 1, [&](long i) {
    int m = 2 + static_cast<int>(i % 3);  // M in {2, 3, 4}
    auto g = gadget_AM(m);
    Int hy = rng.in(1, cap);
    Int span(1);
    for (int j = 0; j < m; ++j) span *= 2;  // 2^M <= e^M
    Int hx = rng.in(1, Int(span * hy));
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    Assignment w = witness_AM(m, x, y);
    if (!check_witness(g.formula, w)) return false;
    return height_diff_le(x, y, Rational(4 * m));
  }));

  out.push_back(check_all("EM-complete-and-sound", samples / 4 + 1, [&](long i) {
    int m = 1 + static_cast<int>(i % 4);
    auto g = gadget_EM(m);
    Int hy = rng.in(1, cap);
    Int hx = rng.in(1, Int(2 * hy));  // |h(x) - h(y)| <= 1 <= M not guaranteed; use ratio <= 2
    if (hx * 2 < hy) hx = hy;         // keep within a factor of 2 both ways
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    Assignment w = witness_EM(m, x, y);
    if (!check_witness(g.formula, w)) return false;
    return height_diff_le(x, y, Rational(4 * m)) && height_diff_le(y, x, Rational(4 * m));
  }));

  auto gl = gadget_L();
  out.push_back(check_all("L-complete-and-sound", samples / 4 + 1, [&](long) {
    Int hx = rng.in(1, cap);
    Int hy = hx * 59875 + rng.upto(Int(1000));  // e^11 < 59875
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    Assignment w = witness_L(x, y);
    if (!check_witness(gl.formula, w)) return false;
    return height_diff_le(x, y, Rational(-10));
  }));

  auto gj = gadget_J();
  out.push_back(check_all("J-membership", samples / 4 + 1, [&](long) {
    Int den = rng.in(1, Int(1000));
    Int num = den + rng.upto(den);  // q in [1, 2]
    Rational q(num, den);
    Assignment w = witness_J(q);
    return check_witness(gj.formula, w) && q >= Rational(1) && q <= Rational(2);
  }));
  return out;
}

std::vector<SuiteResult> run_interp(const Int& multiplier, const Int& m_max) {
  std::vector<SuiteResult> out;
  SlackReport slack = slack_analysis(Rational(4));

  out.push_back(check_all("slack-chain-values", 1, [&](long) {
    bool has160 = false, has240 = false, has84 = false;
    for (const auto& c : slack.constraints) {
      if (c.intermediate == Rational(160)) has160 = true;
      if (c.intermediate == Rational(240)) has240 = true;
      if (c.intermediate == Rational(84)) has84 = true;
    }
    return has160 && has240 && has84 && slack.d_min < Rational(30000);
  }));

  out.push_back(check_all("profile-floor", 1, [&](long) {
    try {
      build_profile(5, 1);
      return false;
    } catch (const ProfileError&) {
      return true;
    }
  }));

  Profile profile = build_profile(multiplier, m_max);

  out.push_back(check_all("theta-roundtrip", mpz_get_si(m_max.get_mpz_t()) + 1, [&](long m) {
    X4Certificate cert = encode(m, profile);
    return decode(cert.q, profile) == m && certificate_theta(cert) == m &&
           certified_theta_bound(cert.q, m, profile, Rational(4) * profile.c_e);
  }));

  out.push_back(check_all("membership-gadgets", 1, [&](long) {
    auto gx = gadget_Xn(4, profile);
    X4Certificate one = encode(1, profile);
    Assignment w = witness_X4(one, profile);
    if (!check_witness(gx.formula, w)) return false;
    X4Certificate zero = encode(0, profile);
    return check_witness(gadget_zero(profile).formula, witness_theta_zero(zero, profile)) &&
           check_witness(gadget_one(profile).formula, witness_theta_one(one, profile));
  }));

  out.push_back(check_all("relation-gadgets", 1, [&](long) {
    X4Certificate c0 = encode(0, profile), c1 = encode(1, profile), c2 = encode(2, profile);
    if (!check_witness(gadget_eq(profile).formula, witness_theta_eq(c1, c1, profile)))
      return false;
    if (!check_witness(gadget_add(profile).formula, witness_theta_add(c1, c1, c2, profile)))
      return false;
    return check_witness(gadget_B(profile).formula, witness_theta_B(c0, c1, profile));
  }));
  return out;
}

std::vector<SuiteResult> run_reduce(const Int& multiplier, const Int& m_max) {
  std::vector<SuiteResult> out;

  auto unary = [](long n) {
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
  };

  out.push_back(check_all("multiplication-from-B", 31 * 31, [&](long i) {
    long x = i / 31, y = i % 31;
    NatFormula f = NatFormula::eq(Term::mul(unary(x), unary(y)), unary(x * y));
    NatFormula wrong = NatFormula::eq(Term::mul(unary(x), unary(y)), unary(x * y + 1));
    Int bound((x + y) * (x + y) + 3);
    return nat_eval(eliminate_mul(f), bound) && !nat_eval(eliminate_mul(wrong), bound);
  }));

  out.push_back(check_all("eliminate-mul-equivalence", 1, [&](long) {
    std::vector<std::string> corpus = {
        "(exists (x) (= (* x x) (+ (+ 1 1) (+ 1 1))))",
        "(exists (x y) (and (= (* x y) (+ (+ 1 1) (+ (+ 1 1) (+ 1 1)))) (= x (+ 1 1))))",
        "(= (* (+ 1 1) (+ 1 1)) (+ (+ 1 1) (+ 1 1)))",
    };
    for (const auto& text : corpus) {
      NatFormula f = parse_nat_formula(text);
      if (nat_eval(f, 30) != nat_eval(eliminate_mul(f), 40)) return false;
    }
    return true;
  }));

  Profile profile = build_profile(multiplier, m_max);
  out.push_back(check_all("compile-roundtrip", 1, [&](long) {
    NatFormula f = parse_nat_formula("(exists (x) (= (+ x x) (+ 1 1)))");
    CompileOutput cout = compile(f, profile);
    NatAssignment a{{"x", Int(1)}};
    Assignment w = witness_up(cout, a, profile);
    if (!check_witness(cout.sentence, w)) return false;
    NatAssignment back = witness_down(w, cout, profile);
    return back.at("x") == 1;
  }));
  return out;
}

}  // namespace heightinterp::suites
