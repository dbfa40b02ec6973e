#include "heightinterp/gadgets.hpp"

#include <map>
#include <mutex>

#include "foursquares_internal.hpp"

namespace heightinterp {

namespace {

Term sq(const Term& t) { return Term::mul(t, t); }

Term sum_of_squares(const std::array<std::string, 4>& names) {
  Term s01 = Term::add(sq(Term::var(names[0])), sq(Term::var(names[1])));
  Term s23 = Term::add(sq(Term::var(names[2])), sq(Term::var(names[3])));
  return Term::add(s01, s23);
}

Formula e11(const Term& a, const Term& b) {
  return Formula::logical_and(Formula::h({a}, {b}), Formula::h({b}, {a}));
}

// Values with multiplicative height at most this use the v/(v-1) element of J
// with exhaustive four-square decompositions; larger values use constructed
// representations.
const Int kDeskHeight(1000000);

Int gcd(const Int& a, const Int& b) {
  Int g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

JElement j_element_small(const Int& v) {
  JElement e;
  if (v == 1) {
    e.q = Rational(1);
    e.low = {Rational(0), Rational(0), Rational(0), Rational(0)};
    e.high = {Rational(1), Rational(0), Rational(0), Rational(0)};
    return e;
  }
  if (v == 2) {
    e.q = Rational(2);
    e.low = {Rational(1), Rational(0), Rational(0), Rational(0)};
    e.high = {Rational(0), Rational(0), Rational(0), Rational(0)};
    return e;
  }
  Int b = v - 1;
  e.q = Rational(v, b);
  // q - 1 = 1/(v-1): decompose v-1 and divide by v-1.
  auto lo = four_squares(b);
  // 2 - q = (v-2)/(v-1): Euler product of the two decompositions.
  auto hi = detail::euler_product(four_squares(v - 2), lo);
  for (int i = 0; i < 4; ++i) {
    e.low[i] = Rational(lo[i], b);
    e.high[i] = Rational(hi[i], b);
  }
  return e;
}

// v = 2(z^2 + w^2) + (s^2 + t^2); q = v/b with b = z^2+w^2+s^2+t^2.
struct JDecomp {
  Int z, w, s, t;
};

JDecomp decompose_1122(const Int& v, unsigned salt) {
  if (mpz_fdiv_ui(v.get_mpz_t(), 4) == 0) {
    JDecomp d = decompose_1122(v / 4, salt);
    return {d.z * 2, d.w * 2, d.s * 2, d.t * 2};
  }
  if (mpz_even_p(v.get_mpz_t())) {
    detail::SplitFour f = detail::hunt_split_even(v, salt);
    return {f.x, f.y, f.s, f.t};
  }
  detail::SplitFour f = detail::hunt_split(v, salt);
  // x and y share parity for odd v: x^2 + y^2 = 2z^2 + 2w^2.
  Int z = (f.x + f.y) / 2;
  Int w = f.x > f.y ? (f.x - f.y) / 2 : (f.y - f.x) / 2;
  return {z, w, f.s, f.t};
}

JElement j_element_from_pieces(const Int& v, const Int& z, const Int& w, const Int& s,
                               const Int& t) {
  Int alpha = z * z + w * w;
  Int gamma = s * s + t * t;
  Int b = alpha + gamma;
  if (2 * alpha + gamma != v) throw Error("j_element: inconsistent decomposition");
  if (gcd(v, b) != 1) throw Error("j_element: q not reduced");
  JElement e;
  e.q = Rational(v, b);
  auto lo = detail::euler_product({z, w, Int(0), Int(0)}, {s, t, z, w});
  auto hi = detail::euler_product({s, t, Int(0), Int(0)}, {s, t, z, w});
  Rational lo_sum(0), hi_sum(0);
  for (int i = 0; i < 4; ++i) {
    e.low[i] = Rational(lo[i], b);
    e.high[i] = Rational(hi[i], b);
    lo_sum += e.low[i] * e.low[i];
    hi_sum += e.high[i] * e.high[i];
  }
  if (lo_sum != e.q - Rational(1) || hi_sum != Rational(2) - e.q)
    throw Error("j_element: square decomposition check failed");
  return e;
}

JElement j_element_large(const Int& v) {
  for (unsigned salt = 0; salt < 64; ++salt) {
    JDecomp d = decompose_1122(v, salt);
    Int b = d.z * d.z + d.w * d.w + d.s * d.s + d.t * d.t;
    if (gcd(v, b) != 1) continue;
    return j_element_from_pieces(v, d.z, d.w, d.s, d.t);
  }
  throw Error("j_element: no reduced decomposition found");
}

std::mutex g_j_cache_mutex;
std::map<Int, JElement> g_j_cache;

void j_cache_put(const Int& v, JElement e) {
  std::lock_guard<std::mutex> lock(g_j_cache_mutex);
  g_j_cache.emplace(v, std::move(e));
}

}  // namespace

JElement j_element_with_height(const Int& v) {
  if (v < 1) throw Error("j_element_with_height: requires v >= 1");
  {
    std::lock_guard<std::mutex> lock(g_j_cache_mutex);
    auto it = g_j_cache.find(v);
    if (it != g_j_cache.end()) return it->second;
  }
  JElement e = v <= kDeskHeight ? j_element_small(v) : j_element_large(v);
  if (mult_height(e.q).value != v) throw Error("j_element_with_height: height mismatch");
  j_cache_put(v, e);
  return e;
}

Int nice_height_integer(const Int& target) {
  if (target < 1) throw Error("nice_height_integer: requires target >= 1");
  if (target <= kDeskHeight) return target;
  for (Int a = detail::isqrt(target / 2); a >= 1; a -= 1) {
    Int rem = target - 2 * a * a;
    Int c_top = detail::isqrt(rem);
    if (c_top < 1) c_top = 1;
    Int c_floor = c_top > 64 ? c_top - 64 : Int(1);
    for (Int c = c_top; c >= c_floor; c -= 1) {
      if (gcd(a, c) != 1) continue;
      Int v = 2 * a * a + c * c;
      if (v <= kDeskHeight) return v;
      // b = a^2 + c^2 is coprime to v, and the square decompositions of
      // q-1 = a^2/b and 2-q = c^2/b are products of known two-square forms.
      j_cache_put(v, j_element_from_pieces(v, a, Int(0), c, Int(0)));
      return v;
    }
  }
  throw Error("nice_height_integer: no coprime representation found");
}

// ---------------------------------------------------------------------------
// Formula builders

Formula build_J(const Term& q, FreshNames& fresh, JPlan& plan) {
  for (int i = 0; i < 4; ++i) plan.low[i] = fresh.next();
  for (int i = 0; i < 4; ++i) plan.high[i] = fresh.next();
  Formula above = Formula::eq(q, Term::add(Term::one(), sum_of_squares(plan.low)));
  Formula below = Formula::eq(Term::integer(2), Term::add(q, sum_of_squares(plan.high)));
  std::vector<std::string> vars(plan.low.begin(), plan.low.end());
  vars.insert(vars.end(), plan.high.begin(), plan.high.end());
  return Formula::exists(std::move(vars), Formula::logical_and(above, below));
}

void fill_J(const JPlan& plan, const JElement& e, Assignment& out) {
  for (int i = 0; i < 4; ++i) {
    out.set(plan.low[i], e.low[i]);
    out.set(plan.high[i], e.high[i]);
  }
}

Formula build_A(const Term& x, const Term& y, FreshNames& fresh, APlan& plan) {
  plan.q = fresh.next();
  Term qv = Term::var(plan.q);
  Formula j = build_J(qv, fresh, plan.j);
  Formula same_height = e11(y, qv);
  Formula bounded = Formula::h({x}, {Term::add(qv, Term::integer(5))});
  return Formula::exists({plan.q}, and_all({j, same_height, bounded}));
}

void fill_A(const APlan& plan, const Rational& x, const Rational& y, Assignment& out) {
  Int hx = mult_height(x).value;
  Int hy = mult_height(y).value;
  if (!certified_log_le(hx, hy, Rational(1)))
    throw RefusalError("witness_A: requires h(x) <= h(y) + 1");
  JElement e = j_element_with_height(hy);
  out.set(plan.q, e.q);
  fill_J(plan.j, e, out);
  Int q_plus5_height = e.q.numerator() + 5 * e.q.denominator();
  if (hx > q_plus5_height) throw Error("witness_A: internal height bound violated");
}

Formula build_AM(int m, const Term& x, const Term& y, FreshNames& fresh, AMPlan& plan) {
  if (m < 1) throw Error("build_AM: requires M >= 1");
  plan.m = m;
  plan.ts.clear();
  plan.atoms.clear();
  if (m == 1) {
    plan.atoms.emplace_back();
    return build_A(x, y, fresh, plan.atoms.back());
  }
  for (int j = 1; j <= 2 * m - 1; ++j) plan.ts.push_back(fresh.next());
  std::vector<Formula> atoms;
  std::vector<Term> chain;
  chain.push_back(x);
  for (const auto& t : plan.ts) chain.push_back(Term::var(t));
  chain.push_back(y);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    plan.atoms.emplace_back();
    atoms.push_back(build_A(chain[i], chain[i + 1], fresh, plan.atoms.back()));
  }
  return Formula::exists(plan.ts, and_all(std::move(atoms)));
}

void fill_AM(const AMPlan& plan, const Rational& x, const Rational& y, Assignment& out) {
  if (plan.m == 1) {
    fill_A(plan.atoms[0], x, y, out);
    return;
  }
  Int hx = mult_height(x).value;
  Int hy = mult_height(y).value;
  if (!certified_log_le(hx, hy, Rational(plan.m)))
    throw RefusalError("witness_AM: requires h(x) <= h(y) + M");
  std::vector<Rational> chain;
  chain.push_back(x);
  for (int j = 1; j <= 2 * plan.m - 1; ++j) {
    Int target = hy << static_cast<unsigned>(2 * plan.m - j);
    chain.push_back(Rational(nice_height_integer(target)));
  }
  chain.push_back(y);
  for (std::size_t i = 0; i < plan.ts.size(); ++i) out.set(plan.ts[i], chain[i + 1]);
  for (std::size_t i = 0; i < plan.atoms.size(); ++i)
    fill_A(plan.atoms[i], chain[i], chain[i + 1], out);
}

Formula build_EM(int m, const Term& x, const Term& y, FreshNames& fresh, EMPlan& plan) {
  Formula fwd = build_AM(m, x, y, fresh, plan.fwd);
  Formula bwd = build_AM(m, y, x, fresh, plan.bwd);
  return Formula::logical_and(fwd, bwd);
}

void fill_EM(const EMPlan& plan, const Rational& x, const Rational& y, Assignment& out) {
  fill_AM(plan.fwd, x, y, out);
  fill_AM(plan.bwd, y, x, out);
}

Formula build_L(const Term& x, const Term& y, FreshNames& fresh, LPlan& plan) {
  plan.q = fresh.next();
  Term qv = Term::var(plan.q);
  Formula j = build_J(qv, fresh, plan.j);
  Formula same_height = e11(x, qv);
  Formula gap = Formula::h({Term::add(qv, Term::integer(50000))}, {y});
  return Formula::exists({plan.q}, and_all({j, same_height, gap}));
}

void fill_L(const LPlan& plan, const Rational& x, const Rational& y, Assignment& out) {
  Int hx = mult_height(x).value;
  Int hy = mult_height(y).value;
  if (!certified_log_le(hx, hy, Rational(-11)))
    throw RefusalError("witness_L: requires h(x) + 11 <= h(y)");
  JElement e = j_element_with_height(hx);
  out.set(plan.q, e.q);
  fill_J(plan.j, e, out);
  Int gap_height = e.q.numerator() + 50000 * e.q.denominator();
  if (gap_height > hy) throw Error("witness_L: internal height bound violated");
}

// ---------------------------------------------------------------------------
// Canonical instances

GadgetInstance gadget_J() {
  FreshNames fresh("j");
  JPlan plan;
  Formula f = build_J(Term::var("q"), fresh, plan);
  return {f, {"q"}, {Rational(0), Rational(0)}};
}

GadgetInstance gadget_A() {
  FreshNames fresh("a");
  APlan plan;
  Formula f = build_A(Term::var("x"), Term::var("y"), fresh, plan);
  return {f, {"x", "y"}, {Rational(2), Rational(1)}};
}

GadgetInstance gadget_AM(int m) {
  if (m < 1) throw Error("gadget_AM: requires M >= 1");
  if (m == 1) {
    GadgetInstance a = gadget_A();
    a.guarantee = {Rational(4), Rational(1)};
    return a;
  }
  FreshNames fresh("a");
  AMPlan plan;
  Formula f = build_AM(m, Term::var("x"), Term::var("y"), fresh, plan);
  return {f, {"x", "y"}, {Rational(4 * m), Rational(m)}};
}

GadgetInstance gadget_EM(int m) {
  if (m < 1) throw Error("gadget_EM: requires M >= 1");
  FreshNames fresh("e");
  EMPlan plan;
  Formula f = build_EM(m, Term::var("x"), Term::var("y"), fresh, plan);
  return {f, {"x", "y"}, {Rational(4 * m), Rational(m)}};
}

GadgetInstance gadget_L() {
  FreshNames fresh("l");
  LPlan plan;
  Formula f = build_L(Term::var("x"), Term::var("y"), fresh, plan);
  return {f, {"x", "y"}, {Rational(10), Rational(11)}};
}

Assignment witness_J(const Rational& q) {
  if (q < Rational(1) || q > Rational(2)) throw RefusalError("witness_J: q outside [1, 2]");
  FreshNames fresh("j");
  JPlan plan;
  (void)build_J(Term::var("q"), fresh, plan);
  Assignment w;
  w.set("q", q);
  auto lo = rational_four_squares(q - Rational(1));
  auto hi = rational_four_squares(Rational(2) - q);
  for (int i = 0; i < 4; ++i) {
    w.set(plan.low[i], lo[i]);
    w.set(plan.high[i], hi[i]);
  }
  return w;
}

Assignment witness_A(const Rational& x, const Rational& y) {
  FreshNames fresh("a");
  APlan plan;
  (void)build_A(Term::var("x"), Term::var("y"), fresh, plan);
  Assignment w;
  w.set("x", x);
  w.set("y", y);
  fill_A(plan, x, y, w);
  return w;
}

Assignment witness_AM(int m, const Rational& x, const Rational& y) {
  if (m < 1) throw Error("witness_AM: requires M >= 1");
  if (m == 1) return witness_A(x, y);
  FreshNames fresh("a");
  AMPlan plan;
  (void)build_AM(m, Term::var("x"), Term::var("y"), fresh, plan);
  Assignment w;
  w.set("x", x);
  w.set("y", y);
  fill_AM(plan, x, y, w);
  return w;
}

Assignment witness_EM(int m, const Rational& x, const Rational& y) {
  if (m < 1) throw Error("witness_EM: requires M >= 1");
  FreshNames fresh("e");
  EMPlan plan;
  (void)build_EM(m, Term::var("x"), Term::var("y"), fresh, plan);
  Assignment w;
  w.set("x", x);
  w.set("y", y);
  fill_EM(plan, x, y, w);
  return w;
}

Assignment witness_L(const Rational& x, const Rational& y) {
  FreshNames fresh("l");
  LPlan plan;
  (void)build_L(Term::var("x"), Term::var("y"), fresh, plan);
  Assignment w;
  w.set("x", x);
  w.set("y", y);
  fill_L(plan, x, y, w);
  return w;
}

bool height_diff_le(const Rational& x, const Rational& y, const Rational& c) {
  return certified_log_le(mult_height(x).value, mult_height(y).value, c);
}

void collect_vars(const JPlan& plan, std::vector<std::string>& out) {
  out.insert(out.end(), plan.low.begin(), plan.low.end());
  out.insert(out.end(), plan.high.begin(), plan.high.end());
}

void collect_vars(const APlan& plan, std::vector<std::string>& out) {
  out.push_back(plan.q);
  collect_vars(plan.j, out);
}

void collect_vars(const AMPlan& plan, std::vector<std::string>& out) {
  out.insert(out.end(), plan.ts.begin(), plan.ts.end());
  for (const auto& a : plan.atoms) collect_vars(a, out);
}

void collect_vars(const EMPlan& plan, std::vector<std::string>& out) {
  collect_vars(plan.fwd, out);
  collect_vars(plan.bwd, out);
}

void collect_vars(const LPlan& plan, std::vector<std::string>& out) {
  out.push_back(plan.q);
  collect_vars(plan.j, out);
}

}  // namespace heightinterp
