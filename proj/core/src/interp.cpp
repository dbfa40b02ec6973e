#include "heightinterp/interp.hpp"

#include <utility>

#include "foursquares_internal.hpp"
#include "json.hpp"

namespace heightinterp {

namespace {

// E-thresholds of the definability chain; fixed across profiles.
constexpr int kMZero = 16;
constexpr int kMOne = 32;
constexpr int kMEq = 32;
constexpr int kMAdd = 48;
constexpr int kMB = 20;

Rational max_rat(const Rational& a, const Rational& b) { return a >= b ? a : b; }

Int floor_rational(const Rational& q) {
  Int out;
  mpz_fdiv_q(out.get_mpz_t(), q.numerator().get_mpz_t(), q.denominator().get_mpz_t());
  return out;
}

}  // namespace

SlackReport slack_analysis(const Rational& c_e) {
  if (c_e.sign() <= 0) throw Error("slack_analysis: requires c_E > 0");
  Rational enc = Rational(4) * c_e;  // encoder slack |h(q) - m D| <= 4 c_E

  SlackReport r;
  r.c_e = c_e;
  auto row = [&r](std::string name, Rational intermediate, Rational bound) {
    r.constraints.push_back({std::move(name), std::move(intermediate), std::move(bound)});
  };

  // Uniqueness of m_q: two candidates within the encoder slack differ by < D.
  row("theta-uniqueness", Rational(2) * enc, Rational(2) * enc + Rational(1));
  // theta^{-1}(0): |h(x)| <= 4*16 forces theta(x)*D <= 64 + enc.
  Rational zero_slack = Rational(4 * kMZero);
  row("zero-gadget", zero_slack, zero_slack + enc);
  // theta^{-1}(1): |h(x) - D| <= 4*32 + enc forces |theta(x)-1|*D <= that + enc.
  Rational one_slack = Rational(4 * kMOne) + enc;
  row("one-gadget", one_slack, one_slack + enc);
  // Equality: |theta(x)-theta(y)|*D <= 2*enc + 4*32.
  Rational eq_slack = Rational(2) * enc + Rational(4 * kMEq);
  row("eq-gadget", eq_slack, eq_slack);
  // Addition: |theta(x)+theta(y)-theta(z)|*D <= 3*enc + 4*48.
  Rational add_slack = Rational(3) * enc + Rational(4 * kMAdd);
  row("add-gadget", add_slack, add_slack);
  // Consecutive squares: |h(x) - k^2 D| <= 4*20 + c_E, then the theta window.
  Rational b_slack = Rational(4 * kMB) + c_e;
  row("B-gadget", b_slack, b_slack + enc);

  r.b_dec = Rational(0);
  for (const auto& c : r.constraints)
    if (c.name != "theta-uniqueness") r.b_dec = max_rat(r.b_dec, c.intermediate);
  // Decoding window: values carrying the worst chain slack must still decode.
  row("decode-window", r.b_dec, Rational(2) * r.b_dec);

  r.d_min = Rational(0);
  for (const auto& c : r.constraints) r.d_min = max_rat(r.d_min, c.d_lower_bound);
  return r;
}

std::string SlackReport::to_json(bool pretty) const {
  nlohmann::json j;
  j["c_E"] = c_e.str();
  j["B_dec"] = b_dec.str();
  j["D_min"] = d_min.str();
  j["constraints"] = nlohmann::json::array();
  for (const auto& c : constraints) {
    j["constraints"].push_back({{"name", c.name},
                                {"intermediate", c.intermediate.str()},
                                {"requires_D_above", c.d_lower_bound.str()}});
  }
  return pretty ? j.dump(2) : j.dump();
}

Profile build_profile(const Int& multiplier, const Int& m_max) {
  if (multiplier < 1) throw Error("build_profile: requires N >= 1");
  if (m_max < 1) throw Error("build_profile: requires m_max >= 1");
  const Rational c_e = CurveConstants::get().c_E;
  SlackReport slack = slack_analysis(c_e);
  Rational n_sq(Int(multiplier * multiplier));

  for (int stage = 8; stage <= 14; ++stage) {
    CertifiedReal hhat = canonical_height(generator(), stage);
    CertifiedReal d{hhat.lo * n_sq, hhat.hi * n_sq};
    if (d.hi <= slack.d_min)
      throw ProfileError("build_profile: D <= D_min(" + slack.d_min.str() +
                         "); multiplier too small");
    if (!(d.lo > slack.d_min)) continue;
    Rational total_width = d.width() * Rational(m_max);
    if (total_width > Rational(1, 2)) continue;
    if (!(total_width < (d.lo - Rational(2) * slack.b_dec) / Rational(4))) continue;

    Profile p;
    p.multiplier = multiplier;
    p.c_e = c_e;
    p.d = d;
    p.m_max = m_max;
    p.b_dec = slack.b_dec;
    p.window = (d.lo - Rational(1)) / Rational(2);
    p.stages = stage;
    return p;
  }
  throw PrecisionError("build_profile: D interval did not reach the decoding margin");
}

std::string Profile::to_json(bool pretty) const {
  nlohmann::json j;
  j["N"] = multiplier.get_str();
  j["c_E"] = c_e.str();
  j["D_lo"] = d.lo.str();
  j["D_hi"] = d.hi.str();
  j["m_max"] = m_max.get_str();
  j["B_dec"] = b_dec.str();
  j["window"] = window.str();
  j["stages"] = stages;
  return pretty ? j.dump(2) : j.dump();
}

std::string X4Certificate::to_json(bool pretty) const {
  nlohmann::json j;
  j["k"] = nlohmann::json::array();
  j["u"] = nlohmann::json::array();
  j["r"] = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    j["k"].push_back(k[i].get_str());
    j["u"].push_back(u[i].str());
    j["r"].push_back(r[i].get_str());
  }
  j["q"] = q.str();
  return pretty ? j.dump(2) : j.dump();
}

X4Certificate X4Certificate::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  X4Certificate c;
  for (int i = 0; i < 4; ++i) {
    c.k[i] = Int(j.at("k").at(i).get<std::string>());
    c.u[i] = Rational::from_string(j.at("u").at(i).get<std::string>());
    c.r[i] = Int(j.at("r").at(i).get<std::string>());
  }
  c.q = Rational::from_string(j.at("q").get<std::string>());
  return c;
}

X4Certificate encode(const Int& m, const Profile& profile) {
  if (m < 0 || m > profile.m_max)
    throw Error("encode: m out of range [0, " + profile.m_max.get_str() + "]");
  auto ks = four_squares(m);
  X4Certificate c;
  Int q(1);
  for (int j = 0; j < 4; ++j) {
    c.k[j] = ks[j];
    if (ks[j] == 0) {
      c.u[j] = Rational(0);
      c.r[j] = 1;
    } else {
      c.u[j] = pi(gamma_point(ks[j].get_si(), profile.multiplier));
      c.r[j] = mult_height(c.u[j]).value;
    }
    q *= c.r[j];
  }
  c.q = Rational(q);
  return c;
}

Int decode(const Rational& q, const Profile& profile) {
  Int h_mult = mult_height(q).value;
  CertifiedReal h = log_interval(h_mult, Rational(1, 1000000000));
  Rational mid_h = (h.lo + h.hi) / Rational(2);
  Rational mid_d = (profile.d.lo + profile.d.hi) / Rational(2);
  Int m = floor_rational(mid_h / mid_d + Rational(1, 2));
  if (m < 0) m = 0;

  CertifiedReal diff = h - profile.d.scaled(Rational(m));
  if (diff.abs_upper() <= profile.window) return m;
  Rational lower(0);
  if (diff.lo > Rational(0)) lower = diff.lo;
  if (diff.hi < Rational(0)) lower = -diff.hi;
  if (lower > profile.window)
    throw DecodeError("decode: no integer multiple of D within the window; not a certified X4 value");
  throw PrecisionError("decode: D interval too wide to certify the window check");
}

Int certificate_theta(const X4Certificate& cert) {
  Int m(0);
  for (const auto& kj : cert.k) m += kj * kj;
  return m;
}

bool certified_theta_bound(const Rational& q, const Int& m, const Profile& profile,
                           const Rational& bound) {
  CertifiedReal h = log_interval(mult_height(q).value, Rational(1, 1000000000));
  CertifiedReal diff = h - profile.d.scaled(Rational(m));
  return diff.abs_upper() <= bound;
}

// ---------------------------------------------------------------------------
// Curve chains

namespace {

Term sq(const Term& t) { return Term::mul(t, t); }

Formula e11(const Term& a, const Term& b) {
  return Formula::logical_and(Formula::h({a}, {b}), Formula::h({b}, {a}));
}

Formula s_atom(const Term& x, const Term& y, const Term& z) {
  // h(x) + h(y) = h(z), as E_{1,3}(z, (x, y, xy)).
  std::vector<Term> triple = {x, y, Term::mul(x, y)};
  return Formula::logical_and(Formula::h({z}, triple), Formula::h(triple, {z}));
}

Formula curve_equation(const Term& x, const Term& y) {
  return Formula::eq(sq(y), Term::add(Term::mul(x, sq(x)), Term::integer(2)));
}

/// den*v = num with nonnegative literals.
Formula pin_rational(const Term& v, const Rational& c) {
  Term lhs = Term::mul(Term::integer(c.denominator()), v);
  if (c.sign() >= 0) return Formula::eq(lhs, Term::integer(c.numerator()));
  return Formula::eq(Term::add(lhs, Term::integer(-c.numerator())), Term::zero());
}

}  // namespace

std::vector<std::string> CurveChainPlan::vars() const {
  std::vector<std::string> out{bx, by};
  for (const auto& s : steps) {
    out.push_back(s.lam);
    if (!s.inv.empty()) out.push_back(s.inv);
    out.push_back(s.x);
    out.push_back(s.y);
  }
  return out;
}

std::vector<Formula> build_chain(const Int& multiplier, FreshNames& fresh, CurveChainPlan& plan) {
  if (multiplier < 1) throw Error("build_chain: requires multiplier >= 1");
  plan.bx = fresh.next();
  plan.by = fresh.next();
  plan.steps.clear();

  Term bx = Term::var(plan.bx), by = Term::var(plan.by);
  std::vector<Formula> eqs;
  eqs.push_back(curve_equation(bx, by));

  Term px = bx, py = by;
  auto add_doubling = [&] {
    ChainStep st;
    st.doubling = true;
    st.lam = fresh.next();
    st.x = fresh.next();
    st.y = fresh.next();
    Term lam = Term::var(st.lam), nx = Term::var(st.x), ny = Term::var(st.y);
    eqs.push_back(Formula::eq(Term::mul(Term::integer(2), Term::mul(py, lam)),
                              Term::mul(Term::integer(3), sq(px))));
    eqs.push_back(Formula::eq(Term::add(Term::add(nx, px), px), sq(lam)));
    eqs.push_back(Formula::eq(Term::add(Term::add(ny, py), Term::mul(lam, nx)),
                              Term::mul(lam, px)));
    plan.steps.push_back(st);
    px = nx;
    py = ny;
  };
  auto add_base = [&] {
    ChainStep st;
    st.doubling = false;
    st.lam = fresh.next();
    st.inv = fresh.next();
    st.x = fresh.next();
    st.y = fresh.next();
    Term lam = Term::var(st.lam), inv = Term::var(st.inv);
    Term nx = Term::var(st.x), ny = Term::var(st.y);
    eqs.push_back(
        Formula::eq(Term::mul(inv, px), Term::add(Term::one(), Term::mul(inv, bx))));
    eqs.push_back(Formula::eq(Term::add(Term::mul(lam, px), by),
                              Term::add(Term::mul(lam, bx), py)));
    eqs.push_back(Formula::eq(Term::add(Term::add(nx, px), bx), sq(lam)));
    eqs.push_back(Formula::eq(Term::add(Term::add(ny, py), Term::mul(lam, nx)),
                              Term::mul(lam, px)));
    plan.steps.push_back(st);
    px = nx;
    py = ny;
  };

  long bits = static_cast<long>(mpz_sizeinbase(multiplier.get_mpz_t(), 2));
  for (long i = bits - 2; i >= 0; --i) {
    add_doubling();
    if (mpz_tstbit(multiplier.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) add_base();
  }
  return eqs;
}

void fill_chain(const CurveChainPlan& plan, const Point& base, Assignment& out) {
  if (base.is_infinity() || !on_curve(base)) throw Error("fill_chain: base must be affine");
  out.set(plan.bx, base.x());
  out.set(plan.by, base.y());
  Rational px = base.x(), py = base.y();
  for (const auto& st : plan.steps) {
    Rational lam, nx, ny;
    if (st.doubling) {
      if (py.is_zero()) throw Error("fill_chain: unexpected 2-torsion point");
      lam = (Rational(3) * px * px) / (Rational(2) * py);
      nx = lam * lam - px - px;
      ny = lam * (px - nx) - py;
    } else {
      Rational dx = px - base.x();
      if (dx.is_zero()) throw Error("fill_chain: degenerate addition in the chain");
      out.set(st.inv, Rational(1) / dx);
      lam = (py - base.y()) / dx;
      nx = lam * lam - px - base.x();
      ny = lam * (px - nx) - py;
    }
    out.set(st.lam, lam);
    out.set(st.x, nx);
    out.set(st.y, ny);
    px = nx;
    py = ny;
  }
}

void fill_chain_dummy(const CurveChainPlan& plan, Assignment& out) {
  for (const auto& name : plan.vars()) out.set(name, Rational(0));
}

// ---------------------------------------------------------------------------
// X and X_n

Formula build_X(const Term& gamma, const Int& multiplier, FreshNames& fresh, XPlan& plan) {
  std::vector<Formula> eqs = build_chain(multiplier, fresh, plan.chain);
  eqs.push_back(Formula::eq(gamma, Term::var(plan.chain.final_x())));
  Formula image = Formula::exists(plan.chain.vars(), and_all(std::move(eqs)));
  return Formula::logical_or(Formula::eq(gamma, Term::zero()), image);
}

void fill_X(const XPlan& plan, long k, const Int& /*multiplier*/, Assignment& out) {
  if (k == 0) {
    fill_chain_dummy(plan.chain, out);
    return;
  }
  // The chain equations force the [multiplier] image; the witness only needs
  // the base point [k] P1.
  fill_chain(plan.chain, scalar_mul(Int(k), generator()), out);
}

Formula build_X1(const Term& q, const Int& multiplier, FreshNames& fresh, X1Plan& plan) {
  plan.gamma = fresh.next();
  Term g = Term::var(plan.gamma);
  Formula xf = build_X(g, multiplier, fresh, plan.x);
  return Formula::exists({plan.gamma}, Formula::logical_and(xf, e11(q, g)));
}

void fill_X1(const X1Plan& plan, long k, const Int& multiplier, Assignment& out) {
  Rational g = k == 0 ? Rational(0) : pi(gamma_point(k, multiplier));
  out.set(plan.gamma, g);
  fill_X(plan.x, k, multiplier, out);
}

Formula build_Xn(int n, const Term& q, const Int& multiplier, FreshNames& fresh, XnPlan& plan) {
  if (n < 1) throw Error("build_Xn: requires n >= 1");
  plan.n = n;
  if (n == 1) return build_X1(q, multiplier, fresh, plan.x1);
  plan.u = fresh.next();
  plan.v = fresh.next();
  Term u = Term::var(plan.u), v = Term::var(plan.v);
  plan.sub = std::make_shared<XnPlan>();
  Formula sub = build_Xn(n - 1, u, multiplier, fresh, *plan.sub);
  Formula v_in_x1 = build_X1(v, multiplier, fresh, plan.v1);
  Formula sum = s_atom(u, v, q);
  return Formula::exists({plan.u, plan.v}, and_all({sub, v_in_x1, sum}));
}

void fill_Xn(const XnPlan& plan, const Rational& q, const std::vector<XnItem>& items,
             const Int& multiplier, Assignment& out) {
  if (static_cast<int>(items.size()) != plan.n)
    throw Error("fill_Xn: item count does not match the plan arity");
  Int expected(1);
  for (const auto& it : items) expected *= it.r;
  if (mult_height(q).value != expected)
    throw Error("fill_Xn: value height does not match the item heights");
  if (plan.n == 1) {
    fill_X1(plan.x1, items[0].k, multiplier, out);
    return;
  }
  Int prod(1);
  for (std::size_t j = 0; j + 1 < items.size(); ++j) prod *= items[j].r;
  Rational u_val(prod);
  Rational v_val(items.back().r);
  out.set(plan.u, u_val);
  out.set(plan.v, v_val);
  std::vector<XnItem> head(items.begin(), items.end() - 1);
  fill_Xn(*plan.sub, u_val, head, multiplier, out);
  fill_X1(plan.v1, items.back().k, multiplier, out);
}

void fill_X4_certificate(const XnPlan& plan, const X4Certificate& cert, const Int& multiplier,
                         Assignment& out) {
  std::vector<XnItem> items;
  for (int j = 0; j < 4; ++j) items.push_back({cert.r[j], cert.k[j].get_si()});
  fill_Xn(plan, cert.q, items, multiplier, out);
}

// ---------------------------------------------------------------------------
// C and C'

std::vector<std::string> CPlan::vars() const {
  std::vector<std::string> out = qc.vars();
  auto rv = rc.vars();
  out.insert(out.end(), rv.begin(), rv.end());
  out.push_back(xq1);
  out.push_back(yq1);
  out.push_back(add_lam);
  out.push_back(add_inv);
  out.push_back(dbl_lam);
  return out;
}

Formula build_C(const Term& gamma, const Term& delta, const Profile& profile, FreshNames& fresh,
                CPlan& plan) {
  Point q1 = gamma_point(1, profile.multiplier);

  std::vector<Formula> eqs = build_chain(profile.multiplier, fresh, plan.qc);
  auto r_eqs = build_chain(profile.multiplier, fresh, plan.rc);
  eqs.insert(eqs.end(), r_eqs.begin(), r_eqs.end());

  plan.xq1 = fresh.next();
  plan.yq1 = fresh.next();
  plan.add_lam = fresh.next();
  plan.add_inv = fresh.next();
  plan.dbl_lam = fresh.next();

  Term xq1 = Term::var(plan.xq1), yq1 = Term::var(plan.yq1);
  eqs.push_back(pin_rational(xq1, q1.x()));
  eqs.push_back(pin_rational(yq1, q1.y()));

  Term qx = Term::var(plan.qc.final_x()), qy = Term::var(plan.qc.final_y());
  Term rx = Term::var(plan.rc.final_x()), ry = Term::var(plan.rc.final_y());
  eqs.push_back(Formula::eq(gamma, qx));
  eqs.push_back(Formula::eq(delta, rx));

  // R = Q + Q1: either the chord through distinct points or the tangent at Q1.
  Term lam = Term::var(plan.add_lam), inv = Term::var(plan.add_inv);
  Formula distinct = and_all({
      Formula::eq(Term::mul(inv, qx), Term::add(Term::one(), Term::mul(inv, xq1))),
      Formula::eq(Term::add(Term::mul(lam, qx), yq1), Term::add(Term::mul(lam, xq1), qy)),
      Formula::eq(Term::add(Term::add(rx, qx), xq1), sq(lam)),
      Formula::eq(Term::add(Term::add(ry, qy), Term::mul(lam, rx)), Term::mul(lam, qx)),
  });
  Term dlam = Term::var(plan.dbl_lam);
  Formula tangent = and_all({
      Formula::eq(qx, xq1),
      Formula::eq(qy, yq1),
      Formula::eq(Term::mul(Term::integer(2), Term::mul(yq1, dlam)),
                  Term::mul(Term::integer(3), sq(xq1))),
      Formula::eq(Term::add(Term::add(rx, xq1), xq1), sq(dlam)),
      Formula::eq(Term::add(Term::add(ry, yq1), Term::mul(dlam, rx)), Term::mul(dlam, xq1)),
  });
  eqs.push_back(Formula::logical_or(distinct, tangent));

  return Formula::exists(plan.vars(), and_all(std::move(eqs)));
}

void fill_C(const CPlan& plan, long k, const Profile& profile, Assignment& out) {
  if (k < 1) throw Error("fill_C: requires k >= 1");
  Point q1 = gamma_point(1, profile.multiplier);
  fill_chain(plan.qc, scalar_mul(Int(k), generator()), out);
  fill_chain(plan.rc, scalar_mul(Int(k + 1), generator()), out);
  out.set(plan.xq1, q1.x());
  out.set(plan.yq1, q1.y());

  Point q = gamma_point(k, profile.multiplier);
  if (k == 1) {
    // Q = Q1: tangent branch.
    Rational dlam = (Rational(3) * q1.x() * q1.x()) / (Rational(2) * q1.y());
    out.set(plan.dbl_lam, dlam);
    out.set(plan.add_lam, Rational(0));
    out.set(plan.add_inv, Rational(0));
  } else {
    Rational dx = q.x() - q1.x();
    if (dx.is_zero()) throw Error("fill_C: degenerate chord");
    out.set(plan.add_inv, Rational(1) / dx);
    out.set(plan.add_lam, (q.y() - q1.y()) / dx);
    out.set(plan.dbl_lam, Rational(0));
  }
}

void fill_C_dummy(const CPlan& plan, Assignment& out) {
  for (const auto& name : plan.vars()) out.set(name, Rational(0));
}

Formula build_CPrime(const Term& gamma, const Term& delta, const Profile& profile,
                     FreshNames& fresh, CPrimePlan& plan) {
  plan.gp = fresh.next();
  plan.dp = fresh.next();
  Term gp = Term::var(plan.gp), dp = Term::var(plan.dp);
  Formula c = build_C(gp, dp, profile, fresh, plan.c);
  Formula generic =
      Formula::exists({plan.gp, plan.dp}, and_all({c, e11(gamma, gp), e11(delta, dp)}));

  Int r1 = mult_height(pi(gamma_point(1, profile.multiplier))).value;
  Term r1t = Term::integer(r1);
  // k = 0 and k = -1: one side has height 0, the other the height of pi(Q_1).
  Formula k_zero = Formula::logical_and(e11(gamma, Term::one()), e11(delta, r1t));
  Formula k_minus1 = Formula::logical_and(e11(gamma, r1t), e11(delta, Term::one()));
  return Formula::logical_or(Formula::logical_or(generic, k_zero), k_minus1);
}

void fill_CPrime(const CPrimePlan& plan, long k, const Profile& profile, Assignment& out) {
  if (k < 0) throw Error("fill_CPrime: requires k >= 0");
  if (k == 0) {
    out.set(plan.gp, Rational(0));
    out.set(plan.dp, Rational(0));
    fill_C_dummy(plan.c, out);
    return;
  }
  out.set(plan.gp, pi(gamma_point(k, profile.multiplier)));
  out.set(plan.dp, pi(gamma_point(k + 1, profile.multiplier)));
  fill_C(plan.c, k, profile, out);
}

// ---------------------------------------------------------------------------
// Theta-level gadgets

Formula build_theta_zero(const Term& x, const Profile& profile, FreshNames& fresh,
                         ThetaZeroPlan& plan) {
  Formula em = build_EM(kMZero, Term::zero(), x, fresh, plan.em);
  Formula x4 = build_Xn(4, x, profile.multiplier, fresh, plan.x4);
  return Formula::logical_and(em, x4);
}

void fill_theta_zero(const ThetaZeroPlan& plan, const X4Certificate& x, const Profile& profile,
                     Assignment& out) {
  fill_EM(plan.em, Rational(0), x.q, out);
  fill_X4_certificate(plan.x4, x, profile.multiplier, out);
}

Formula build_theta_one(const Term& x, const Profile& profile, FreshNames& fresh,
                        ThetaOnePlan& plan) {
  X4Certificate one = encode(1, profile);
  Term q1 = Term::integer(one.q.numerator());
  Formula em = build_EM(kMOne, q1, x, fresh, plan.em);
  Formula x4 = build_Xn(4, x, profile.multiplier, fresh, plan.x4);
  return Formula::logical_and(em, x4);
}

void fill_theta_one(const ThetaOnePlan& plan, const X4Certificate& x, const Profile& profile,
                    Assignment& out) {
  X4Certificate one = encode(1, profile);
  fill_EM(plan.em, one.q, x.q, out);
  fill_X4_certificate(plan.x4, x, profile.multiplier, out);
}

Formula build_theta_eq(const Term& x, const Term& y, const Profile& profile, FreshNames& fresh,
                       ThetaEqPlan& plan) {
  Formula em = build_EM(kMEq, x, y, fresh, plan.em);
  Formula x4a = build_Xn(4, x, profile.multiplier, fresh, plan.x4a);
  Formula x4b = build_Xn(4, y, profile.multiplier, fresh, plan.x4b);
  return and_all({em, x4a, x4b});
}

void fill_theta_eq(const ThetaEqPlan& plan, const X4Certificate& x, const X4Certificate& y,
                   const Profile& profile, Assignment& out) {
  fill_EM(plan.em, x.q, y.q, out);
  fill_X4_certificate(plan.x4a, x, profile.multiplier, out);
  fill_X4_certificate(plan.x4b, y, profile.multiplier, out);
}

Formula build_theta_add(const Term& x, const Term& y, const Term& z, const Profile& profile,
                        FreshNames& fresh, ThetaAddPlan& plan) {
  Formula x4a = build_Xn(4, x, profile.multiplier, fresh, plan.x4a);
  Formula x4b = build_Xn(4, y, profile.multiplier, fresh, plan.x4b);
  Formula x4c = build_Xn(4, z, profile.multiplier, fresh, plan.x4c);
  plan.w = fresh.next();
  Term w = Term::var(plan.w);
  Formula em = build_EM(kMAdd, w, z, fresh, plan.em);
  Formula sum = s_atom(x, y, w);
  Formula inner = Formula::exists({plan.w}, Formula::logical_and(em, sum));
  return and_all({x4a, x4b, x4c, inner});
}

void fill_theta_add(const ThetaAddPlan& plan, const X4Certificate& x, const X4Certificate& y,
                    const X4Certificate& z, const Profile& profile, Assignment& out) {
  fill_X4_certificate(plan.x4a, x, profile.multiplier, out);
  fill_X4_certificate(plan.x4b, y, profile.multiplier, out);
  fill_X4_certificate(plan.x4c, z, profile.multiplier, out);
  Rational w_val(Int(mult_height(x.q).value * mult_height(y.q).value));
  out.set(plan.w, w_val);
  fill_EM(plan.em, w_val, z.q, out);
}

Formula build_theta_B(const Term& x, const Term& y, const Profile& profile, FreshNames& fresh,
                      ThetaBPlan& plan) {
  Formula x4a = build_Xn(4, x, profile.multiplier, fresh, plan.x4a);
  Formula x4b = build_Xn(4, y, profile.multiplier, fresh, plan.x4b);
  plan.gamma = fresh.next();
  plan.delta = fresh.next();
  Term g = Term::var(plan.gamma), d = Term::var(plan.delta);
  Formula cp = build_CPrime(g, d, profile, fresh, plan.cp);
  Formula less = build_L(g, d, fresh, plan.l);
  Formula ex = build_EM(kMB, x, g, fresh, plan.ex);
  Formula ey = build_EM(kMB, y, d, fresh, plan.ey);
  Formula inner = Formula::exists({plan.gamma, plan.delta}, and_all({cp, less, ex, ey}));
  return and_all({x4a, x4b, inner});
}

void fill_theta_B(const ThetaBPlan& plan, const X4Certificate& x, const X4Certificate& y,
                  const Profile& profile, Assignment& out) {
  Int tx = certificate_theta(x);
  Int ty = certificate_theta(y);
  Int k_int = detail::isqrt(tx);
  if (k_int * k_int != tx || (k_int + 1) * (k_int + 1) != ty)
    throw RefusalError("witness_B: theta values are not consecutive squares");
  long k = k_int.get_si();

  fill_X4_certificate(plan.x4a, x, profile.multiplier, out);
  fill_X4_certificate(plan.x4b, y, profile.multiplier, out);

  Rational g = k == 0 ? Rational(0) : pi(gamma_point(k, profile.multiplier));
  Rational d = pi(gamma_point(k + 1, profile.multiplier));
  out.set(plan.gamma, g);
  out.set(plan.delta, d);
  fill_CPrime(plan.cp, k, profile, out);
  fill_L(plan.l, g, d, out);
  fill_EM(plan.ex, x.q, g, out);
  fill_EM(plan.ey, y.q, d, out);
}

// ---------------------------------------------------------------------------
// Canonical instances

GadgetInstance gadget_X(const Profile& profile) {
  FreshNames fresh("x");
  XPlan plan;
  Formula f = build_X(Term::var("g"), profile.multiplier, fresh, plan);
  return {f, {"g"}, {Rational(0), Rational(0)}};
}

GadgetInstance gadget_Xn(int n, const Profile& profile) {
  if (n < 1 || n > 4) throw Error("gadget_Xn: requires 1 <= n <= 4");
  FreshNames fresh("x");
  XnPlan plan;
  Formula f = build_Xn(n, Term::var("q"), profile.multiplier, fresh, plan);
  return {f, {"q"}, {Rational(0), Rational(0)}};
}

GadgetInstance gadget_zero(const Profile& profile) {
  FreshNames fresh("z");
  ThetaZeroPlan plan;
  Formula f = build_theta_zero(Term::var("x"), profile, fresh, plan);
  return {f, {"x"}, {Rational(4 * kMZero), Rational(4) * profile.c_e}};
}

GadgetInstance gadget_one(const Profile& profile) {
  FreshNames fresh("o");
  ThetaOnePlan plan;
  Formula f = build_theta_one(Term::var("x"), profile, fresh, plan);
  return {f, {"x"}, {Rational(4 * kMOne) + Rational(4) * profile.c_e, Rational(kMOne)}};
}

GadgetInstance gadget_eq(const Profile& profile) {
  FreshNames fresh("q");
  ThetaEqPlan plan;
  Formula f = build_theta_eq(Term::var("x"), Term::var("y"), profile, fresh, plan);
  return {f, {"x", "y"}, {Rational(2 * 4) * profile.c_e + Rational(4 * kMEq), Rational(kMEq)}};
}

GadgetInstance gadget_add(const Profile& profile) {
  FreshNames fresh("s");
  ThetaAddPlan plan;
  Formula f = build_theta_add(Term::var("x"), Term::var("y"), Term::var("z"), profile, fresh, plan);
  return {f,
          {"x", "y", "z"},
          {Rational(3 * 4) * profile.c_e + Rational(4 * kMAdd), Rational(kMAdd)}};
}

GadgetInstance gadget_B(const Profile& profile) {
  FreshNames fresh("b");
  ThetaBPlan plan;
  Formula f = build_theta_B(Term::var("x"), Term::var("y"), profile, fresh, plan);
  return {f, {"x", "y"}, {Rational(4 * kMB) + profile.c_e, Rational(kMB)}};
}

Assignment witness_X(long k, const Profile& profile) {
  FreshNames fresh("x");
  XPlan plan;
  (void)build_X(Term::var("g"), profile.multiplier, fresh, plan);
  Assignment w;
  w.set("g", k == 0 ? Rational(0) : pi(gamma_point(k, profile.multiplier)));
  fill_X(plan, k, profile.multiplier, w);
  return w;
}

Assignment witness_X4(const X4Certificate& cert, const Profile& profile) {
  FreshNames fresh("x");
  XnPlan plan;
  (void)build_Xn(4, Term::var("q"), profile.multiplier, fresh, plan);
  Assignment w;
  w.set("q", cert.q);
  fill_X4_certificate(plan, cert, profile.multiplier, w);
  return w;
}

Assignment witness_theta_zero(const X4Certificate& x, const Profile& profile) {
  FreshNames fresh("z");
  ThetaZeroPlan plan;
  (void)build_theta_zero(Term::var("x"), profile, fresh, plan);
  Assignment w;
  w.set("x", x.q);
  fill_theta_zero(plan, x, profile, w);
  return w;
}

Assignment witness_theta_one(const X4Certificate& x, const Profile& profile) {
  FreshNames fresh("o");
  ThetaOnePlan plan;
  (void)build_theta_one(Term::var("x"), profile, fresh, plan);
  Assignment w;
  w.set("x", x.q);
  fill_theta_one(plan, x, profile, w);
  return w;
}

Assignment witness_theta_eq(const X4Certificate& x, const X4Certificate& y,
                            const Profile& profile) {
  FreshNames fresh("q");
  ThetaEqPlan plan;
  (void)build_theta_eq(Term::var("x"), Term::var("y"), profile, fresh, plan);
  Assignment w;
  w.set("x", x.q);
  w.set("y", y.q);
  fill_theta_eq(plan, x, y, profile, w);
  return w;
}

Assignment witness_theta_add(const X4Certificate& x, const X4Certificate& y,
                             const X4Certificate& z, const Profile& profile) {
  FreshNames fresh("s");
  ThetaAddPlan plan;
  (void)build_theta_add(Term::var("x"), Term::var("y"), Term::var("z"), profile, fresh, plan);
  Assignment w;
  w.set("x", x.q);
  w.set("y", y.q);
  w.set("z", z.q);
  fill_theta_add(plan, x, y, z, profile, w);
  return w;
}

Assignment witness_theta_B(const X4Certificate& x, const X4Certificate& y,
                           const Profile& profile) {
  FreshNames fresh("b");
  ThetaBPlan plan;
  (void)build_theta_B(Term::var("x"), Term::var("y"), profile, fresh, plan);
  Assignment w;
  w.set("x", x.q);
  w.set("y", y.q);
  fill_theta_B(plan, x, y, profile, w);
  return w;
}

void collect_vars(const XPlan& plan, std::vector<std::string>& out) {
  auto cv = plan.chain.vars();
  out.insert(out.end(), cv.begin(), cv.end());
}

void collect_vars(const X1Plan& plan, std::vector<std::string>& out) {
  out.push_back(plan.gamma);
  collect_vars(plan.x, out);
}

void collect_vars(const XnPlan& plan, std::vector<std::string>& out) {
  if (plan.n == 1) {
    collect_vars(plan.x1, out);
    return;
  }
  out.push_back(plan.u);
  out.push_back(plan.v);
  collect_vars(*plan.sub, out);
  collect_vars(plan.v1, out);
}

void collect_vars(const CPlan& plan, std::vector<std::string>& out) {
  auto cv = plan.vars();
  out.insert(out.end(), cv.begin(), cv.end());
}

void collect_vars(const CPrimePlan& plan, std::vector<std::string>& out) {
  out.push_back(plan.gp);
  out.push_back(plan.dp);
  collect_vars(plan.c, out);
}

void collect_vars(const ThetaZeroPlan& plan, std::vector<std::string>& out) {
  collect_vars(plan.em, out);
  collect_vars(plan.x4, out);
}

void collect_vars(const ThetaOnePlan& plan, std::vector<std::string>& out) {
  collect_vars(plan.em, out);
  collect_vars(plan.x4, out);
}

void collect_vars(const ThetaEqPlan& plan, std::vector<std::string>& out) {
  collect_vars(plan.em, out);
  collect_vars(plan.x4a, out);
  collect_vars(plan.x4b, out);
}

void collect_vars(const ThetaAddPlan& plan, std::vector<std::string>& out) {
  collect_vars(plan.x4a, out);
  collect_vars(plan.x4b, out);
  collect_vars(plan.x4c, out);
  out.push_back(plan.w);
  collect_vars(plan.em, out);
}

void collect_vars(const ThetaBPlan& plan, std::vector<std::string>& out) {
  collect_vars(plan.x4a, out);
  collect_vars(plan.x4b, out);
  out.push_back(plan.gamma);
  out.push_back(plan.delta);
  collect_vars(plan.cp, out);
  collect_vars(plan.l, out);
  collect_vars(plan.ex, out);
  collect_vars(plan.ey, out);
}

}  // namespace heightinterp
