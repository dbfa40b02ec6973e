#pragma once

#include <map>
#include <memory>

#include "heightinterp/interp.hpp"

namespace heightinterp {

/// Positive existential formula over (N; 0, 1, +, x, =) extended with the
/// consecutive-squares atom B(t, t). Terms reuse the ring-term AST.
class NatFormula {
public:
  enum class Kind { Eq, B, And, Or, Exists };

  NatFormula() : NatFormula(eq(Term::zero(), Term::zero())) {}

  static NatFormula eq(Term a, Term b);
  static NatFormula b_rel(Term a, Term b);
  static NatFormula logical_and(NatFormula a, NatFormula b);
  static NatFormula logical_or(NatFormula a, NatFormula b);
  static NatFormula exists(std::vector<std::string> vars, NatFormula body);

  Kind kind() const;
  const Term& lhs_term() const;  // Eq/B
  const Term& rhs_term() const;
  NatFormula lhs() const;  // And/Or
  NatFormula rhs() const;
  const std::vector<std::string>& exists_vars() const;
  NatFormula exists_body() const;

  friend bool operator==(const NatFormula& a, const NatFormula& b);
  friend bool operator!=(const NatFormula& a, const NatFormula& b) { return !(a == b); }

  /// Stable node identity, for evaluator memoization.
  const void* identity() const;

  struct Node;

private:
  explicit NatFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

NatFormula nat_and_all(std::vector<NatFormula> fs);

/// Same S-expression grammar as the height formulas, with (B t t) in place of
/// H atoms and no exists-free restriction.
NatFormula parse_nat_formula(const std::string& text);
std::string render(const NatFormula& f);

using NatAssignment = std::map<std::string, Int>;

/// Bounded exhaustive evaluation of a closed formula: existential variables
/// range over 0..bound, except variables solvable from an equation whose
/// other side is already determined (those take their forced value, even
/// beyond the bound).
bool nat_eval(const NatFormula& f, const Int& bound);

/// Substitution semantics: every variable (free or bound) must appear in env.
bool nat_check(const NatFormula& f, const NatAssignment& env);

std::set<std::string> nat_free_vars(const NatFormula& f);

/// Rewrites every multiplication into the consecutive-squares definition:
/// sigma(x, u) : exists c, B(u, c) and c = u + x + x + 1, and
/// x*y = z : exists u v w, sigma(x,u), sigma(y,v), sigma(x+y,w),
///           w = u + z + z + v. The result is x-free over {0, 1, +, B, =}.
NatFormula eliminate_mul(const NatFormula& f);

struct CompileRecipe;  // witness-construction plans; defined in reduce.cpp

struct CompileOutput {
  NatFormula source;
  Formula sentence;
  std::map<std::string, std::string> var_map;  // N-variable -> Q-variable
  std::vector<std::string> inventory;          // gadget instances used
  std::shared_ptr<const CompileRecipe> recipe;

  /// Serializes source, sentence and var_map (not the recipe).
  std::string to_json(bool pretty = false) const;
};

/// Translates a positive existential N-formula into an L_h sentence over Q:
/// multiplications are eliminated, terms are flattened to atoms over fresh
/// variables, every N-variable is relativized to X_4, and the atoms become
/// the theta-level gadgets.
CompileOutput compile(const NatFormula& f, const Profile& profile);

/// Builds an accepted witness for compile(f).sentence from an N-assignment
/// satisfying f. Values must stay within profile.m_max.
Assignment witness_up(const CompileOutput& out, const NatAssignment& a, const Profile& profile);

/// Decodes the mapped variables of an accepted witness and verifies the
/// result against the source formula.
NatAssignment witness_down(const Assignment& w, const CompileOutput& out, const Profile& profile);

}  // namespace heightinterp
