#pragma once

#include <memory>

#include "heightinterp/curve.hpp"
#include "heightinterp/gadgets.hpp"

namespace heightinterp {

/// One lower-bound constraint on D implied by a conclusion step of the
/// definability chain, with the intermediate bound the step derives.
struct SlackConstraint {
  std::string name;
  Rational intermediate;
  Rational d_lower_bound;
};

struct SlackReport {
  Rational c_e;
  std::vector<SlackConstraint> constraints;
  Rational b_dec;  // largest soundness slack in the chain
  Rational d_min;  // max of the lower bounds
  std::string to_json(bool pretty = false) const;
};

/// Enumerates the D-constraints with the E-thresholds fixed at the calibrated
/// values (16, 32, 48, 20) and the encoder slack 4*c_e.
SlackReport slack_analysis(const Rational& c_e);

/// Interpretation constants: multiplier N, the certified interval for
/// D = N^2 * hhat(P1), the decoding range, and derived slack data.
struct Profile {
  Int multiplier;
  Rational c_e;
  CertifiedReal d;
  Int m_max;
  Rational b_dec;
  Rational window;  // decode acceptance window, < D/2
  int stages = 0;   // doubling stages behind the D interval

  std::string to_json(bool pretty = false) const;
};

/// Validates N against the slack floor and tightens the D interval until the
/// decoding margins hold. Throws ProfileError when D <= D_min.
Profile build_profile(const Int& multiplier, const Int& m_max);

/// Constructive membership certificate for q in X_4 with theta(q) = sum k_j^2.
struct X4Certificate {
  std::array<Int, 4> k;
  std::array<Rational, 4> u;  // pi(Q_{k_j}) or 0
  std::array<Int, 4> r;       // multiplicative heights of u_j
  Rational q;                 // r1 r2 r3 r4

  std::string to_json(bool pretty = false) const;
  static X4Certificate from_json(const std::string& text);
};

/// theta^{-1}: certificate for m with |h(q) - m D| <= 4 c_E.
X4Certificate encode(const Int& m, const Profile& profile);

/// theta: the unique m with |h(q) - m D| within the profile window, decided
/// with certified intervals. The caller certifies q in X_4.
Int decode(const Rational& q, const Profile& profile);

// ---------------------------------------------------------------------------
// Membership formulas. Builders record introduced names in plans; fillers
// assign every plan variable (inactive disjunct branches get zeros).

struct ChainStep {
  bool doubling = true;
  std::string lam, inv, x, y;  // inv used by addition steps only
};

struct CurveChainPlan {
  std::string bx, by;
  std::vector<ChainStep> steps;
  const std::string& final_x() const { return steps.empty() ? bx : steps.back().x; }
  const std::string& final_y() const { return steps.empty() ? by : steps.back().y; }
  std::vector<std::string> vars() const;
};

/// Equation list pinning (final_x, final_y) = [multiplier](bx, by); the base
/// curve equation is included.
std::vector<Formula> build_chain(const Int& multiplier, FreshNames& fresh, CurveChainPlan& plan);
void fill_chain(const CurveChainPlan& plan, const Point& base, Assignment& out);
void fill_chain_dummy(const CurveChainPlan& plan, Assignment& out);

struct XPlan {
  CurveChainPlan chain;
};
/// gamma in X: gamma = 0, or gamma = pi([multiplier] P) for an affine P.
Formula build_X(const Term& gamma, const Int& multiplier, FreshNames& fresh, XPlan& plan);
/// k = 0 selects the zero branch; otherwise the chain starts at [k] P1.
void fill_X(const XPlan& plan, long k, const Int& multiplier, Assignment& out);

struct X1Plan {
  std::string gamma;
  XPlan x;
};
Formula build_X1(const Term& q, const Int& multiplier, FreshNames& fresh, X1Plan& plan);
void fill_X1(const X1Plan& plan, long k, const Int& multiplier, Assignment& out);

struct XnPlan {
  int n = 1;
  X1Plan x1;  // n == 1
  std::string u, v;
  std::shared_ptr<XnPlan> sub;  // X_{n-1}(u), n > 1
  X1Plan v1;                    // X_1(v), n > 1
};
Formula build_Xn(int n, const Term& q, const Int& multiplier, FreshNames& fresh, XnPlan& plan);

/// One height summand: an X-element gamma = pi(Q_k) (or 0 when k = 0) whose
/// multiplicative height is r.
struct XnItem {
  Int r;
  long k = 0;
};
void fill_Xn(const XnPlan& plan, const Rational& q, const std::vector<XnItem>& items,
             const Int& multiplier, Assignment& out);
void fill_X4_certificate(const XnPlan& plan, const X4Certificate& cert, const Int& multiplier,
                         Assignment& out);

// ---------------------------------------------------------------------------
// The consecutive-multiple pair set C and its height closure C'.

struct CPlan {
  CurveChainPlan qc, rc;       // chains producing Q and R = Q + Q1
  std::string xq1, yq1;        // Q1 coordinates, pinned by literal equations
  std::string add_lam, add_inv;  // distinct-points branch
  std::string dbl_lam;           // doubling branch (Q = Q1)
  std::vector<std::string> vars() const;
};
Formula build_C(const Term& gamma, const Term& delta, const Profile& profile, FreshNames& fresh,
                CPlan& plan);
/// k >= 1: witnesses (pi(Q_k), pi(Q_{k+1})).
void fill_C(const CPlan& plan, long k, const Profile& profile, Assignment& out);
void fill_C_dummy(const CPlan& plan, Assignment& out);

struct CPrimePlan {
  std::string gp, dp;  // gamma', delta' of the generic disjunct
  CPlan c;
};
Formula build_CPrime(const Term& gamma, const Term& delta, const Profile& profile,
                     FreshNames& fresh, CPrimePlan& plan);
/// k >= 0; k = 0 uses the height-level disjunct with gamma = 0.
void fill_CPrime(const CPrimePlan& plan, long k, const Profile& profile, Assignment& out);

// ---------------------------------------------------------------------------
// Theta-level relation gadgets (LemmaDef1-LemmaDef3 shapes).

struct ThetaZeroPlan {
  EMPlan em;
  XnPlan x4;
};
Formula build_theta_zero(const Term& x, const Profile& profile, FreshNames& fresh,
                         ThetaZeroPlan& plan);
void fill_theta_zero(const ThetaZeroPlan& plan, const X4Certificate& x, const Profile& profile,
                     Assignment& out);

struct ThetaOnePlan {
  EMPlan em;
  XnPlan x4;
};
Formula build_theta_one(const Term& x, const Profile& profile, FreshNames& fresh,
                        ThetaOnePlan& plan);
void fill_theta_one(const ThetaOnePlan& plan, const X4Certificate& x, const Profile& profile,
                    Assignment& out);

struct ThetaEqPlan {
  EMPlan em;
  XnPlan x4a, x4b;
};
Formula build_theta_eq(const Term& x, const Term& y, const Profile& profile, FreshNames& fresh,
                       ThetaEqPlan& plan);
void fill_theta_eq(const ThetaEqPlan& plan, const X4Certificate& x, const X4Certificate& y,
                   const Profile& profile, Assignment& out);

struct ThetaAddPlan {
  XnPlan x4a, x4b, x4c;
  std::string w;
  EMPlan em;
};
Formula build_theta_add(const Term& x, const Term& y, const Term& z, const Profile& profile,
                        FreshNames& fresh, ThetaAddPlan& plan);
void fill_theta_add(const ThetaAddPlan& plan, const X4Certificate& x, const X4Certificate& y,
                    const X4Certificate& z, const Profile& profile, Assignment& out);

struct ThetaBPlan {
  XnPlan x4a, x4b;
  std::string gamma, delta;
  CPrimePlan cp;
  LPlan l;
  EMPlan ex, ey;
};
Formula build_theta_B(const Term& x, const Term& y, const Profile& profile, FreshNames& fresh,
                      ThetaBPlan& plan);
void fill_theta_B(const ThetaBPlan& plan, const X4Certificate& x, const X4Certificate& y,
                  const Profile& profile, Assignment& out);

// ---------------------------------------------------------------------------
// Canonical instances and witnesses.

GadgetInstance gadget_X(const Profile& profile);    // interface {"g"}
GadgetInstance gadget_Xn(int n, const Profile& profile);  // interface {"q"}
GadgetInstance gadget_zero(const Profile& profile);       // {"x"}
GadgetInstance gadget_one(const Profile& profile);        // {"x"}
GadgetInstance gadget_eq(const Profile& profile);         // {"x","y"}
GadgetInstance gadget_add(const Profile& profile);        // {"x","y","z"}
GadgetInstance gadget_B(const Profile& profile);          // {"x","y"}

Assignment witness_X(long k, const Profile& profile);
Assignment witness_X4(const X4Certificate& cert, const Profile& profile);
Assignment witness_theta_zero(const X4Certificate& x, const Profile& profile);
Assignment witness_theta_one(const X4Certificate& x, const Profile& profile);
Assignment witness_theta_eq(const X4Certificate& x, const X4Certificate& y,
                            const Profile& profile);
Assignment witness_theta_add(const X4Certificate& x, const X4Certificate& y,
                             const X4Certificate& z, const Profile& profile);
Assignment witness_theta_B(const X4Certificate& x, const X4Certificate& y,
                           const Profile& profile);

/// theta of a certificate: sum of the squares of its k entries.
Int certificate_theta(const X4Certificate& cert);

// Existential-variable inventories, used to zero-fill inactive branches.
void collect_vars(const XPlan& plan, std::vector<std::string>& out);
void collect_vars(const X1Plan& plan, std::vector<std::string>& out);
void collect_vars(const XnPlan& plan, std::vector<std::string>& out);
void collect_vars(const CPlan& plan, std::vector<std::string>& out);
void collect_vars(const CPrimePlan& plan, std::vector<std::string>& out);
void collect_vars(const ThetaZeroPlan& plan, std::vector<std::string>& out);
void collect_vars(const ThetaOnePlan& plan, std::vector<std::string>& out);
void collect_vars(const ThetaEqPlan& plan, std::vector<std::string>& out);
void collect_vars(const ThetaAddPlan& plan, std::vector<std::string>& out);
void collect_vars(const ThetaBPlan& plan, std::vector<std::string>& out);

/// Certified |h(q) - m D| <= bound check (used by the encoder tests and the
/// round-trip suites).
bool certified_theta_bound(const Rational& q, const Int& m, const Profile& profile,
                           const Rational& bound);

}  // namespace heightinterp
