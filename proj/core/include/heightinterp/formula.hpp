#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "heightinterp/heights.hpp"

namespace heightinterp {

/// Ring term over {0, 1, +, *} and variables. Immutable, cheap to copy.
/// Integer literals enter as binary expansions over these constructors.
class Term {
public:
  enum class Kind { Var, Zero, One, Add, Mul };

  Term() : Term(zero()) {}

  static Term var(std::string name);
  static Term zero();
  static Term one();
  static Term add(Term a, Term b);
  static Term mul(Term a, Term b);
  /// Binary expansion of n >= 0, O(log n) nodes.
  static Term integer(const Int& n);

  Kind kind() const;
  const std::string& var_name() const;
  Term lhs() const;
  Term rhs() const;

  std::uint32_t depth() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

  struct Node;

private:
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
  friend class Formula;
};

/// Positive existential formula: term equalities, height comparisons H_{m,n},
/// conjunction, disjunction, and existential quantification.
class Formula {
public:
  enum class Kind { Eq, H, And, Or, Exists };

  Formula() : Formula(eq(Term::zero(), Term::zero())) {}

  static Formula eq(Term a, Term b);
  static Formula h(std::vector<Term> xs, std::vector<Term> ys);
  static Formula logical_and(Formula a, Formula b);
  static Formula logical_or(Formula a, Formula b);
  static Formula exists(std::vector<std::string> vars, Formula body);

  Kind kind() const;
  const Term& eq_lhs() const;
  const Term& eq_rhs() const;
  const std::vector<Term>& h_xs() const;
  const std::vector<Term>& h_ys() const;
  Formula lhs() const;
  Formula rhs() const;
  const std::vector<std::string>& exists_vars() const;
  Formula exists_body() const;

  std::uint32_t depth() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

  struct Node;

private:
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Balanced conjunction/disjunction of a nonempty list.
Formula and_all(std::vector<Formula> fs);
Formula or_all(std::vector<Formula> fs);

/// Witness: total map from variable names to rationals.
class Assignment {
public:
  void set(const std::string& name, Rational value) { values_[name] = std::move(value); }
  const Rational* find(const std::string& name) const;
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  std::size_t size() const { return values_.size(); }

  /// Later entries win on collision.
  void merge(const Assignment& other);

  const std::map<std::string, Rational>& values() const { return values_; }

  std::string to_json(bool pretty = false) const;
  static Assignment from_json(const std::string& text);

private:
  std::map<std::string, Rational> values_;
};

/// S-expression grammar:
///   formula := (exists (v...) f) | (and f f) | (or f f) | (= t t)
///            | (H m n (t...) (t...))
///   term    := nonneg-integer | identifier | (+ t t) | (* t t)
Formula parse_formula(const std::string& text);
Term parse_term(const std::string& text);

std::string render(const Formula& f);
std::string render(const Term& t);

/// Exact evaluation of f under w. Existential quantifiers are checked by
/// substitution from w, never by search. Throws WitnessError naming the
/// variable if the verdict depends on an unassigned variable.
bool check_witness(const Formula& f, const Assignment& w);

/// Exact term value under w.
Rational eval_term(const Term& t, const Assignment& w);

std::set<std::string> free_vars(const Formula& f);

/// The closed sentence P_M: exists x1 x2 a t with t(a^3 - a) = 1,
/// x2^2 = x1^5 + a, and H_{1,2}(a^M, (x1, x2)).
Formula example_PM(int m);

/// Deterministic fresh-name supply ("_p0", "_p1", ... for prefix "p").
class FreshNames {
public:
  explicit FreshNames(std::string prefix) : prefix_(std::move(prefix)) {}
  std::string next() { return "_" + prefix_ + std::to_string(counter_++); }

private:
  std::string prefix_;
  std::uint64_t counter_ = 0;
};

}  // namespace heightinterp
