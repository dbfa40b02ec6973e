// Acceptance suite: every criterion runs at its stated tolerance and prints
// one PASS/FAIL line. The process exits nonzero if any criterion fails.

#include <heightinterp/reduce.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

using namespace heightinterp;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Rng {
  gmp_randstate_t state;
  explicit Rng(unsigned long seed) {
    gmp_randinit_mt(state);
    gmp_randseed_ui(state, seed);
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

// Shared state across criteria (profiles and compiled corpus).
Profile* g_profile30 = nullptr;
Profile* g_profile200 = nullptr;
std::vector<CompileOutput> g_compiled_corpus;

// --------------------------------------------------------------------------

Outcome criterion1_height_sum() {
  Outcome out;
  Rng rng(101);
  const Int mag("1000000000000000000");
  auto start = Clock::now();
  for (int i = 0; i < 10000; ++i) {
    Rational q1 = rng.rational(mag), q2 = rng.rational(mag);
    bool same = mult_height(q1).value * mult_height(q2).value ==
                mult_height(std::vector<Rational>{q1, q2, q1 * q2}).value;
    out.require(same, "identity failed for " + q1.str() + ", " + q2.str());
    if (!out.ok) break;
  }
  out.require(seconds_since(start) < 10.0, "exceeded 10 s");
  return out;
}

Outcome criterion2_canonical_height() {
  Outcome out;
  const Rational reference(7545769, 10000000);

  auto start = Clock::now();
  CertifiedReal h6 = canonical_height(generator(), 6);
  out.require(h6.width() < Rational(1, 100), "k=6 width >= 1e-2");
  out.require(h6.contains(reference), "k=6 interval misses 0.7545769");
  out.require(seconds_since(start) < 10.0, "k=6 exceeded 10 s");

  start = Clock::now();
  CertifiedReal h12 = canonical_height(generator(), 12);
  out.require(h12.width() < Rational(1, 1000000), "k=12 width >= 1e-6");
  out.require(h12.contains(reference), "k=12 interval misses 0.7545769");
  out.require(seconds_since(start) < 300.0, "k=12 exceeded 5 min");
  return out;
}

Outcome criterion3_height_gap() {
  Outcome out;
  const CurveConstants& cc = CurveConstants::get();
  auto start = Clock::now();
  CertifiedReal hh = canonical_height(generator(), 12);
  for (long k = 1; k <= 12; ++k) {
    CertifiedReal gap =
        hh.scaled(Rational(k * k)) -
        log_height(naive_height(scalar_mul(k, generator())), Rational(1, 1000000));
    out.require(gap.lo > cc.gap_lower && gap.hi < cc.gap_upper,
                "gap outside window at k=" + std::to_string(k));
  }
  out.require(seconds_since(start) < 300.0, "exceeded 5 min");
  return out;
}

Outcome criterion4_gadgets() {
  Outcome out;
  Rng rng(104);
  const Int cap(1000);
  auto start = Clock::now();

  GadgetInstance ga = gadget_A();
  for (int i = 0; i < 1000 && out.ok; ++i) {
    Int hy = rng.upto(Int(999)) + 1;
    Int hx = rng.upto(Int(2 * hy - 1)) + 1;
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    out.require(check_witness(ga.formula, witness_A(x, y)), "A rejected a built witness");
    out.require(height_diff_le(x, y, Rational(2)), "A soundness bound failed");
  }

  for (int m = 2; m <= 4 && out.ok; ++m) {
    GadgetInstance g = gadget_AM(m);
    for (int i = 0; i < 334 && out.ok; ++i) {
      Int hy = rng.upto(cap - 1) + 1;
      Int hx = rng.upto(Int((Int(1) << static_cast<unsigned>(m)) * hy - 1)) + 1;
      Rational x = rng.with_height(hx), y = rng.with_height(hy);
      out.require(check_witness(g.formula, witness_AM(m, x, y)),
                  "A^M rejected a built witness");
      out.require(height_diff_le(x, y, Rational(4 * m)), "A^M soundness bound failed");
    }
  }

  for (int m = 1; m <= 4 && out.ok; ++m) {
    GadgetInstance g = gadget_EM(m);
    for (int i = 0; i < 250 && out.ok; ++i) {
      Int hy = rng.upto(Int(998)) + 2;
      Int hx = hy / 2 + rng.upto(hy);
      if (hx < 1) hx = 1;
      Rational x = rng.with_height(hx), y = rng.with_height(hy);
      out.require(check_witness(g.formula, witness_EM(m, x, y)),
                  "E^M rejected a built witness");
      out.require(height_diff_le(x, y, Rational(4 * m)) &&
                      height_diff_le(y, x, Rational(4 * m)),
                  "E^M soundness bound failed");
    }
  }

  GadgetInstance gl = gadget_L();
  for (int i = 0; i < 1000 && out.ok; ++i) {
    Int hx = rng.upto(Int(999)) + 1;
    Int hy = hx * 59875 + rng.upto(Int(100000));
    Rational x = rng.with_height(hx), y = rng.with_height(hy);
    out.require(check_witness(gl.formula, witness_L(x, y)), "L rejected a built witness");
    out.require(height_diff_le(x, y, Rational(-10)), "L soundness bound failed");
  }

  out.require(seconds_since(start) < 60.0, "exceeded 1 min");
  return out;
}

Outcome criterion5_theta_roundtrip() {
  Outcome out;
  auto start = Clock::now();

  static Profile p30 = build_profile(30, 100);
  g_profile30 = &p30;
  for (long m = 0; m <= 100 && out.ok; ++m) {
    X4Certificate cert = encode(m, p30);
    out.require(decode(cert.q, p30) == m, "N=30 decode mismatch at m=" + std::to_string(m));
    out.require(certified_theta_bound(cert.q, m, p30, Rational(16)),
                "N=30 |h - mD| <= 16 not certified at m=" + std::to_string(m));
  }
  out.require(seconds_since(start) < 600.0, "N=30 run exceeded 10 min");

  static Profile p200 = build_profile(200, 5);
  g_profile200 = &p200;
  out.require(p200.d.lo > Rational(30000), "N=200 profile D <= 30000");
  for (long m = 0; m <= 5 && out.ok; ++m) {
    X4Certificate cert = encode(m, p200);
    out.require(decode(cert.q, p200) == m, "N=200 decode mismatch at m=" + std::to_string(m));
    out.require(certified_theta_bound(cert.q, m, p200, Rational(16)),
                "N=200 |h - mD| <= 16 not certified at m=" + std::to_string(m));
  }
  return out;
}

/// 1 + ... + 1 (n ones), balanced; binary literal sugar would reintroduce
/// multiplications into the grid.
Term unary_numeral(long n) {
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

Outcome criterion6_mult_from_B() {
  Outcome out;
  auto start = Clock::now();
  for (long x = 0; x <= 30 && out.ok; ++x) {
    for (long y = 0; y <= 30 && out.ok; ++y) {
      NatFormula right =
          NatFormula::eq(Term::mul(unary_numeral(x), unary_numeral(y)), unary_numeral(x * y));
      NatFormula wrong = NatFormula::eq(Term::mul(unary_numeral(x), unary_numeral(y)),
                                        unary_numeral(x * y + 1));
      Int bound((x + y) * (x + y) + 3);
      out.require(nat_eval(eliminate_mul(right), bound),
                  "defined multiplication missed " + std::to_string(x) + "*" + std::to_string(y));
      out.require(!nat_eval(eliminate_mul(wrong), bound),
                  "defined multiplication accepted a wrong product");
    }
  }
  out.require(seconds_since(start) < 1.0, "exceeded 1 s");
  return out;
}

Outcome criterion7_end_to_end() {
  Outcome out;
  auto start = Clock::now();
  const Profile& p = *g_profile30;

  struct Item {
    std::string text;
    NatAssignment witness;
  };
  // True sentences with additions, a square through multiplication, and
  // consecutive-square facts; values stay small so the witness heights do.
  std::vector<Item> corpus = {
      {"(exists (x) (= x 0))", {{"x", Int(0)}}},
      {"(exists (x) (= (+ x x) (+ (+ 1 1) (+ 1 1))))", {{"x", Int(2)}}},
      {"(exists (x) (= (+ x (+ 1 1)) (+ (+ (+ 1 1) (+ 1 1)) 1)))", {{"x", Int(3)}}},
      {"(= (+ (+ 1 1) (+ (+ 1 1) 1)) (+ (+ (+ 1 1) (+ 1 1)) 1))", {}},
      {"(exists (x y) (and (= (+ x y) (+ (+ 1 1) 1)) (= x (+ 1 1))))",
       {{"x", Int(2)}, {"y", Int(1)}}},
      {"(exists (x) (= (* x x) 1))", {{"x", Int(1)}}},
      {"(exists (x) (B x 1))", {{"x", Int(0)}}},
      {"(exists (x y) (and (B x y) (= x 0)))", {{"x", Int(0)}, {"y", Int(1)}}},
      {"(B (+ (+ 1 1) (+ 1 1)) (+ (+ (+ 1 1) (+ 1 1)) (+ (+ 1 1) (+ (+ 1 1) 1))))", {}},
      {"(exists (x) (B (* x x) (+ (* x x) (+ (+ x x) 1))))", {{"x", Int(1)}}},
      {"(exists (x) (= (+ x x) x))", {{"x", Int(0)}}},
      {"(exists (x) (or (= x 1) (= x (+ 1 1))))", {{"x", Int(2)}}},
  };

  g_compiled_corpus.clear();
  std::vector<Assignment> witnesses;
  for (const auto& item : corpus) {
    if (!out.ok) break;
    NatFormula f = parse_nat_formula(item.text);
    CompileOutput compiled = compile(f, p);
    Assignment w = witness_up(compiled, item.witness, p);
    out.require(check_witness(compiled.sentence, w),
                "compiled witness rejected for " + item.text);
    NatAssignment down = witness_down(w, compiled, p);
    for (const auto& [name, value] : item.witness)
      out.require(down.at(name) == value, "witness_down changed " + name);
    out.require(nat_check(f, down), "decoded assignment fails " + item.text);
    g_compiled_corpus.push_back(std::move(compiled));
    witnesses.push_back(std::move(w));
  }

  // Perturbations: nudging any mapped variable must break acceptance.
  int rejected = 0;
  for (std::size_t i = 0; i < g_compiled_corpus.size() && rejected < 12; ++i) {
    const auto& compiled = g_compiled_corpus[i];
    if (compiled.var_map.empty()) continue;
    for (const auto& [nvar, qvar] : compiled.var_map) {
      Assignment bad = witnesses[i];
      bad.set(qvar, *bad.find(qvar) + Rational(1));
      if (!check_witness(compiled.sentence, bad)) ++rejected;
      if (rejected >= 12) break;
    }
  }
  out.require(rejected >= 10, "fewer than 10 perturbed witnesses were rejected");
  out.require(seconds_since(start) < 900.0, "exceeded 15 min");
  return out;
}

Outcome criterion8_slack() {
  Outcome out;
  auto start = Clock::now();
  SlackReport report = slack_analysis(Rational(4));
  bool has160 = false, has240 = false, has84 = false;
  for (const auto& c : report.constraints) {
    if (c.intermediate == Rational(160)) has160 = true;
    if (c.intermediate == Rational(240)) has240 = true;
    if (c.intermediate == Rational(84)) has84 = true;
  }
  out.require(has160 && has240 && has84, "missing one of the bounds 160/240/84");
  out.require(report.d_min < Rational(30000), "D_min >= 30000");

  try {
    build_profile(200, 5);
    build_profile(30, 100);
  } catch (const Error&) {
    out.require(false, "N=200 or N=30 was rejected");
  }
  try {
    build_profile(5, 1);
    out.require(false, "N=5 was accepted");
  } catch (const ProfileError&) {
  }
  out.require(seconds_since(start) < 1.0, "exceeded 1 s");
  return out;
}

Term random_term(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 4);
  switch (pick(rng)) {
    case 0:
      return Term::zero();
    case 1:
      return Term::one();
    case 2:
      return Term::var("v" + std::to_string(rng() % 4));
    case 3:
      return Term::add(random_term(rng, depth - 1), random_term(rng, depth - 1));
    default:
      return Term::mul(random_term(rng, depth - 1), random_term(rng, depth - 1));
  }
}

Formula random_formula(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 4);
  switch (pick(rng)) {
    case 0:
      return Formula::eq(random_term(rng, 2), random_term(rng, 2));
    case 1: {
      std::vector<Term> xs{random_term(rng, 1)}, ys{random_term(rng, 1), random_term(rng, 1)};
      return Formula::h(std::move(xs), std::move(ys));
    }
    case 2:
      return Formula::logical_and(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3:
      return Formula::logical_or(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    default:
      return Formula::exists({"w" + std::to_string(rng() % 3)}, random_formula(rng, depth - 1));
  }
}

Outcome criterion9_parser_roundtrip() {
  Outcome out;
  auto start = Clock::now();
  std::mt19937 rng(109);
  for (int i = 0; i < 1000 && out.ok; ++i) {
    Formula f = random_formula(rng, 4);
    out.require(parse_formula(render(f)) == f, "random AST round trip failed");
  }

  const Profile& p = *g_profile30;
  std::vector<Formula> gadget_formulas = {
      gadget_J().formula,      gadget_A().formula,      gadget_AM(2).formula,
      gadget_AM(4).formula,    gadget_EM(3).formula,    gadget_L().formula,
      gadget_X(p).formula,     gadget_Xn(4, p).formula, gadget_zero(p).formula,
      gadget_one(p).formula,   gadget_eq(p).formula,    gadget_add(p).formula,
      gadget_B(p).formula,     example_PM(3),
  };
  for (const auto& f : gadget_formulas)
    out.require(parse_formula(render(f)) == f, "gadget formula round trip failed");
  for (const auto& compiled : g_compiled_corpus)
    out.require(parse_formula(render(compiled.sentence)) == compiled.sentence,
                "compiled sentence round trip failed");
  out.require(seconds_since(start) < 10.0, "exceeded 10 s");
  return out;
}

}  // namespace

int main() {
  setvbuf(stdout, nullptr, _IONBF, 0);
  struct Criterion {
    int id;
    const char* label;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria = {
      {1, "height-sum identity, 10^4 random pairs", criterion1_height_sum},
      {2, "canonical height certification at k=6 and k=12", criterion2_canonical_height},
      {3, "naive-vs-canonical gap window for k <= 12", criterion3_height_gap},
      {4, "gadget completeness and soundness, 10^3 instances each", criterion4_gadgets},
      {5, "theta round trip (N=30 m<=100, N=200 m<=5)", criterion5_theta_roundtrip},
      {6, "multiplication-from-B oracle equivalence, 0..30", criterion6_mult_from_B},
      {7, "end-to-end compile and witness pipeline at N=30", criterion7_end_to_end},
      {8, "slack analysis and profile floor", criterion8_slack},
      {9, "parser round trip over ASTs, gadgets and sentences", criterion9_parser_roundtrip},
  };

  bool all_ok = true;
  for (const auto& c : criteria) {
    auto start = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    all_ok = all_ok && out.ok;
    std::printf("%s  criterion %d: %s (%.1fs)%s%s\n", out.ok ? "PASS" : "FAIL", c.id, c.label,
                seconds_since(start), out.detail.empty() ? "" : " -- ", out.detail.c_str());
  }
  return all_ok ? 0 : 1;
}
