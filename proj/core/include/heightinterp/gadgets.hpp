#pragma once

#include <array>
#include <vector>

#include "heightinterp/formula.hpp"

namespace heightinterp {

/// One-sided bounds of a definability gadget: an accepted pair satisfies the
/// relation up to sound_bound; a pair within complete_bound is witnessable.
struct Guarantee {
  Rational sound_bound;
  Rational complete_bound;
};

struct GadgetInstance {
  Formula formula;
  std::vector<std::string> interface_vars;
  Guarantee guarantee;
};

/// k1 >= k2 >= k3 >= k4 >= 0 with sum of squares n. Exhaustive and
/// lexicographically largest for small n; for large n a seeded, deterministic
/// prime-splitting search (sorted, not necessarily lexicographically largest).
std::array<Int, 4> four_squares(const Int& n);

/// Four rationals with sum of squares exactly q >= 0.
std::array<Rational, 4> rational_four_squares(const Rational& q);

/// Element of J = [1,2] with prescribed multiplicative height v, carrying
/// explicit square decompositions of q-1 and 2-q. Cached per v; deterministic.
struct JElement {
  Rational q;
  std::array<Rational, 4> low;   // q - 1 = sum low_i^2
  std::array<Rational, 4> high;  // 2 - q = sum high_i^2
};
JElement j_element_with_height(const Int& v);

/// Integer near target (within a vanishing relative error) whose JElement is
/// constructible without any prime search; identity below the desk threshold.
Int nice_height_integer(const Int& target);

// --- formula builders over terms.
// Each builder records the existential names it introduced in a plan so the
// matching filler can assign them. Fillers always assign every plan variable.

struct JPlan {
  std::array<std::string, 4> low;
  std::array<std::string, 4> high;
};
Formula build_J(const Term& q, FreshNames& fresh, JPlan& plan);
void fill_J(const JPlan& plan, const JElement& e, Assignment& out);

struct APlan {
  std::string q;
  JPlan j;
};
Formula build_A(const Term& x, const Term& y, FreshNames& fresh, APlan& plan);
/// Requires h(x) <= h(y) + 1.
void fill_A(const APlan& plan, const Rational& x, const Rational& y, Assignment& out);

struct AMPlan {
  int m = 1;
  std::vector<std::string> ts;  // 2M-1 chain variables (empty for M = 1)
  std::vector<APlan> atoms;     // 2M atoms (one for M = 1)
};
Formula build_AM(int m, const Term& x, const Term& y, FreshNames& fresh, AMPlan& plan);
/// Requires h(x) <= h(y) + M.
void fill_AM(const AMPlan& plan, const Rational& x, const Rational& y, Assignment& out);

struct EMPlan {
  AMPlan fwd, bwd;
};
Formula build_EM(int m, const Term& x, const Term& y, FreshNames& fresh, EMPlan& plan);
/// Requires |h(x) - h(y)| <= M.
void fill_EM(const EMPlan& plan, const Rational& x, const Rational& y, Assignment& out);

struct LPlan {
  std::string q;
  JPlan j;
};
Formula build_L(const Term& x, const Term& y, FreshNames& fresh, LPlan& plan);
/// Requires h(x) + 11 <= h(y).
void fill_L(const LPlan& plan, const Rational& x, const Rational& y, Assignment& out);

// --- canonical instances (interface variables "q" / "x","y") and their
// witness builders. Witnesses include the interface values.

GadgetInstance gadget_J();
GadgetInstance gadget_A();
GadgetInstance gadget_AM(int m);
GadgetInstance gadget_EM(int m);
GadgetInstance gadget_L();

Assignment witness_J(const Rational& q);
Assignment witness_A(const Rational& x, const Rational& y);
Assignment witness_AM(int m, const Rational& x, const Rational& y);
Assignment witness_EM(int m, const Rational& x, const Rational& y);
Assignment witness_L(const Rational& x, const Rational& y);

/// h(x) - h(y) <= c, decided with certified logarithm intervals.
bool height_diff_le(const Rational& x, const Rational& y, const Rational& c);

// Existential-variable inventories, used to zero-fill inactive branches.
void collect_vars(const JPlan& plan, std::vector<std::string>& out);
void collect_vars(const APlan& plan, std::vector<std::string>& out);
void collect_vars(const AMPlan& plan, std::vector<std::string>& out);
void collect_vars(const EMPlan& plan, std::vector<std::string>& out);
void collect_vars(const LPlan& plan, std::vector<std::string>& out);

namespace detail {
/// Euler's four-square product: returns c with sum c_i^2 = (sum a^2)(sum b^2).
std::array<Int, 4> euler_product(const std::array<Int, 4>& a, const std::array<Int, 4>& b);
/// Seeded variant used for retries; salt 0 is the public result.
std::array<Int, 4> four_squares_seeded(const Int& n, unsigned salt);
}  // namespace detail

}  // namespace heightinterp
