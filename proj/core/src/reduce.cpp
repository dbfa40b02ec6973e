#include "heightinterp/reduce.hpp"

#include <cctype>
#include <functional>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "foursquares_internal.hpp"
#include "json.hpp"

namespace heightinterp {

// ---------------------------------------------------------------------------
// NatFormula AST

struct NatFormula::Node {
  Kind kind;
  Term t1, t2;
  std::shared_ptr<const Node> f1, f2;
  std::vector<std::string> vars;
};

NatFormula NatFormula::eq(Term a, Term b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Eq;
  n->t1 = std::move(a);
  n->t2 = std::move(b);
  return NatFormula(std::move(n));
}

NatFormula NatFormula::b_rel(Term a, Term b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::B;
  n->t1 = std::move(a);
  n->t2 = std::move(b);
  return NatFormula(std::move(n));
}

NatFormula NatFormula::logical_and(NatFormula a, NatFormula b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->f1 = std::move(a.node_);
  n->f2 = std::move(b.node_);
  return NatFormula(std::move(n));
}

NatFormula NatFormula::logical_or(NatFormula a, NatFormula b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->f1 = std::move(a.node_);
  n->f2 = std::move(b.node_);
  return NatFormula(std::move(n));
}

NatFormula NatFormula::exists(std::vector<std::string> vars, NatFormula body) {
  if (vars.empty()) throw Error("NatFormula::exists: empty variable list");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Exists;
  n->vars = std::move(vars);
  n->f1 = std::move(body.node_);
  return NatFormula(std::move(n));
}

NatFormula::Kind NatFormula::kind() const { return node_->kind; }

const Term& NatFormula::lhs_term() const {
  if (node_->kind != Kind::Eq && node_->kind != Kind::B) throw Error("NatFormula: not an atom");
  return node_->t1;
}
const Term& NatFormula::rhs_term() const {
  if (node_->kind != Kind::Eq && node_->kind != Kind::B) throw Error("NatFormula: not an atom");
  return node_->t2;
}
NatFormula NatFormula::lhs() const {
  if (node_->kind != Kind::And && node_->kind != Kind::Or) throw Error("NatFormula: no lhs");
  return NatFormula(node_->f1);
}
NatFormula NatFormula::rhs() const {
  if (node_->kind != Kind::And && node_->kind != Kind::Or) throw Error("NatFormula: no rhs");
  return NatFormula(node_->f2);
}
const std::vector<std::string>& NatFormula::exists_vars() const {
  if (node_->kind != Kind::Exists) throw Error("NatFormula: not a quantifier");
  return node_->vars;
}
NatFormula NatFormula::exists_body() const {
  if (node_->kind != Kind::Exists) throw Error("NatFormula: not a quantifier");
  return NatFormula(node_->f1);
}

const void* NatFormula::identity() const { return node_.get(); }

bool operator==(const NatFormula& a, const NatFormula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NatFormula::Kind::Eq:
    case NatFormula::Kind::B:
      return a.lhs_term() == b.lhs_term() && a.rhs_term() == b.rhs_term();
    case NatFormula::Kind::And:
    case NatFormula::Kind::Or:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case NatFormula::Kind::Exists:
      return a.exists_vars() == b.exists_vars() && a.exists_body() == b.exists_body();
  }
  return false;
}

NatFormula nat_and_all(std::vector<NatFormula> fs) {
  if (fs.empty()) throw Error("nat_and_all: empty list");
  while (fs.size() > 1) {
    std::vector<NatFormula> next;
    for (std::size_t i = 0; i + 1 < fs.size(); i += 2)
      next.push_back(NatFormula::logical_and(fs[i], fs[i + 1]));
    if (fs.size() % 2) next.push_back(fs.back());
    fs = std::move(next);
  }
  return fs[0];
}

// ---------------------------------------------------------------------------
// Parse / render

namespace {

struct NatLexer {
  const std::string& text;
  std::size_t pos = 0;

  struct Tok {
    enum class T { LParen, RParen, Sym, Num, End } t;
    std::string sym;
    Int num;
    std::size_t at = 0;
  };

  Tok cur;
  bool buffered = false;

  explicit NatLexer(const std::string& s) : text(s) {}

  const Tok& peek() {
    if (!buffered) {
      cur = lex();
      buffered = true;
    }
    return cur;
  }
  Tok next() {
    peek();
    buffered = false;
    return cur;
  }

  Tok lex() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    Tok t;
    t.at = pos;
    if (pos >= text.size()) {
      t.t = Tok::T::End;
      return t;
    }
    char c = text[pos];
    if (c == '(') {
      ++pos;
      t.t = Tok::T::LParen;
      return t;
    }
    if (c == ')') {
      ++pos;
      t.t = Tok::T::RParen;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t s = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      t.t = Tok::T::Num;
      t.num = Int(text.substr(s, pos - s));
      return t;
    }
    if (c == '+' || c == '*' || c == '=') {
      ++pos;
      t.t = Tok::T::Sym;
      t.sym = std::string(1, c);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t s = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
              text[pos] == '\'' || text[pos] == '.'))
        ++pos;
      t.t = Tok::T::Sym;
      t.sym = text.substr(s, pos - s);
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }
};

struct NatParser {
  NatLexer lex;
  explicit NatParser(const std::string& s) : lex(s) {}

  Term term() {
    auto t = lex.next();
    using T = NatLexer::Tok::T;
    switch (t.t) {
      case T::Num:
        return Term::integer(t.num);
      case T::Sym:
        if (t.sym == "+" || t.sym == "*" || t.sym == "=")
          throw ParseError("operator outside parentheses", t.at);
        return Term::var(t.sym);
      case T::LParen: {
        auto op = lex.next();
        if (op.t != T::Sym || (op.sym != "+" && op.sym != "*"))
          throw ParseError("expected '+' or '*'", op.at);
        Term a = term();
        Term b = term();
        expect_rparen();
        return op.sym == "+" ? Term::add(a, b) : Term::mul(a, b);
      }
      default:
        throw ParseError("expected a term", t.at);
    }
  }

  void expect_rparen() {
    auto t = lex.next();
    if (t.t != NatLexer::Tok::T::RParen) throw ParseError("expected ')'", t.at);
  }

  NatFormula formula() {
    using T = NatLexer::Tok::T;
    auto t = lex.next();
    if (t.t != T::LParen) throw ParseError("expected '('", t.at);
    auto op = lex.next();
    if (op.t != T::Sym) throw ParseError("expected a formula head", op.at);
    if (op.sym == "=") {
      Term a = term(), b = term();
      expect_rparen();
      return NatFormula::eq(a, b);
    }
    if (op.sym == "B") {
      Term a = term(), b = term();
      expect_rparen();
      return NatFormula::b_rel(a, b);
    }
    if (op.sym == "and" || op.sym == "or") {
      NatFormula a = formula(), b = formula();
      expect_rparen();
      return op.sym == "and" ? NatFormula::logical_and(a, b) : NatFormula::logical_or(a, b);
    }
    if (op.sym == "exists") {
      auto lp = lex.next();
      if (lp.t != T::LParen) throw ParseError("expected '('", lp.at);
      std::vector<std::string> vars;
      while (lex.peek().t == T::Sym) vars.push_back(lex.next().sym);
      expect_rparen();
      if (vars.empty()) throw ParseError("exists needs at least one variable", op.at);
      NatFormula body = formula();
      expect_rparen();
      return NatFormula::exists(std::move(vars), body);
    }
    throw ParseError("unknown formula head '" + op.sym + "'", op.at);
  }
};

void render_nat_rec(const NatFormula& f, std::string& out) {
  switch (f.kind()) {
    case NatFormula::Kind::Eq:
    case NatFormula::Kind::B:
      out += f.kind() == NatFormula::Kind::Eq ? "(= " : "(B ";
      out += render(f.lhs_term());
      out += ' ';
      out += render(f.rhs_term());
      out += ')';
      return;
    case NatFormula::Kind::And:
    case NatFormula::Kind::Or:
      out += f.kind() == NatFormula::Kind::And ? "(and " : "(or ";
      render_nat_rec(f.lhs(), out);
      out += ' ';
      render_nat_rec(f.rhs(), out);
      out += ')';
      return;
    case NatFormula::Kind::Exists: {
      out += "(exists (";
      bool first = true;
      for (const auto& v : f.exists_vars()) {
        if (!first) out += ' ';
        first = false;
        out += v;
      }
      out += ") ";
      render_nat_rec(f.exists_body(), out);
      out += ')';
      return;
    }
  }
}

}  // namespace

NatFormula parse_nat_formula(const std::string& text) {
  NatParser p(text);
  NatFormula f = p.formula();
  if (p.lex.peek().t != NatLexer::Tok::T::End)
    throw ParseError("trailing input after formula", p.lex.peek().at);
  return f;
}

std::string render(const NatFormula& f) {
  std::string out;
  render_nat_rec(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation over N

namespace {

void term_vars_nat(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::Var:
      out.insert(t.var_name());
      return;
    case Term::Kind::Add:
    case Term::Kind::Mul:
      term_vars_nat(t.lhs(), out);
      term_vars_nat(t.rhs(), out);
      return;
    default:
      return;
  }
}

void nat_vars_rec(const NatFormula& f, std::set<std::string>& bound, std::set<std::string>& free,
                  std::set<std::string>& all) {
  switch (f.kind()) {
    case NatFormula::Kind::Eq:
    case NatFormula::Kind::B: {
      std::set<std::string> vs;
      term_vars_nat(f.lhs_term(), vs);
      term_vars_nat(f.rhs_term(), vs);
      for (const auto& v : vs) {
        all.insert(v);
        if (!bound.count(v)) free.insert(v);
      }
      return;
    }
    case NatFormula::Kind::And:
    case NatFormula::Kind::Or:
      nat_vars_rec(f.lhs(), bound, free, all);
      nat_vars_rec(f.rhs(), bound, free, all);
      return;
    case NatFormula::Kind::Exists: {
      std::vector<std::string> added;
      for (const auto& v : f.exists_vars()) {
        all.insert(v);
        if (bound.insert(v).second) added.push_back(v);
      }
      nat_vars_rec(f.exists_body(), bound, free, all);
      for (const auto& v : added) bound.erase(v);
      return;
    }
  }
}

Int eval_term_nat(const Term& t, const NatAssignment& env) {
  switch (t.kind()) {
    case Term::Kind::Zero:
      return Int(0);
    case Term::Kind::One:
      return Int(1);
    case Term::Kind::Var: {
      auto it = env.find(t.var_name());
      if (it == env.end())
        throw WitnessError("unassigned variable \"" + t.var_name() + "\" in N-term");
      return it->second;
    }
    case Term::Kind::Add:
      return eval_term_nat(t.lhs(), env) + eval_term_nat(t.rhs(), env);
    case Term::Kind::Mul:
      return eval_term_nat(t.lhs(), env) * eval_term_nat(t.rhs(), env);
  }
  return Int(0);
}

bool holds_b_rel(const Int& a, const Int& b) {
  if (a < 0 || b < 0) return false;
  Int k = detail::isqrt(a);
  return k * k == a && b == a + 2 * k + 1;
}

// Conjunct schedule for one Exists node: which flattened conjuncts become
// checkable after each bound variable, plus solvable-equation shortcuts.
struct ExistsSchedule {
  struct Conjunct {
    NatFormula f;
    std::set<std::string> local_vars;  // intersection with the exists list
  };
  std::vector<Conjunct> conjuncts;
  // For index i: conjuncts fully local-closed once vars[0..i] are bound.
  std::vector<std::vector<int>> ready_after;  // size vars+1; [0] = no local vars
};

void flatten_and(const NatFormula& f, std::vector<NatFormula>& out) {
  if (f.kind() == NatFormula::Kind::And) {
    flatten_and(f.lhs(), out);
    flatten_and(f.rhs(), out);
    return;
  }
  out.push_back(f);
}

std::mutex g_sched_mutex;
// The stored NatFormula copy keeps the node alive, so identities stay unique.
std::unordered_map<const void*, std::pair<NatFormula, std::shared_ptr<const ExistsSchedule>>>
    g_sched_cache;

std::shared_ptr<const ExistsSchedule> schedule_for(const NatFormula& ex) {
  const void* node_key = ex.identity();
  {
    std::lock_guard<std::mutex> lock(g_sched_mutex);
    auto it = g_sched_cache.find(node_key);
    if (it != g_sched_cache.end()) return it->second.second;
  }
  auto sched = std::make_shared<ExistsSchedule>();
  const auto& vars = ex.exists_vars();
  std::vector<NatFormula> flat;
  flatten_and(ex.exists_body(), flat);
  std::set<std::string> var_set(vars.begin(), vars.end());
  for (auto& c : flat) {
    std::set<std::string> bound, free, all;
    nat_vars_rec(c, bound, free, all);
    ExistsSchedule::Conjunct conj{c, {}};
    for (const auto& v : free)
      if (var_set.count(v)) conj.local_vars.insert(v);
    sched->conjuncts.push_back(std::move(conj));
  }
  sched->ready_after.assign(vars.size() + 1, {});
  for (std::size_t ci = 0; ci < sched->conjuncts.size(); ++ci) {
    const auto& lv = sched->conjuncts[ci].local_vars;
    std::size_t last = 0;
    for (std::size_t vi = 0; vi < vars.size(); ++vi)
      if (lv.count(vars[vi])) last = vi + 1;
    sched->ready_after[last].push_back(static_cast<int>(ci));
  }
  {
    std::lock_guard<std::mutex> lock(g_sched_mutex);
    g_sched_cache.emplace(node_key, std::make_pair(ex, sched));
  }
  return sched;
}

bool eval_search(const NatFormula& f, NatAssignment& env, const Int& bound);

/// Occurrence count of `var` in t, demanding it never sits under a
/// multiplication (so t is var + rest over N).
int linear_occurrences(const Term& t, const std::string& var, bool& ok) {
  switch (t.kind()) {
    case Term::Kind::Zero:
    case Term::Kind::One:
      return 0;
    case Term::Kind::Var:
      return t.var_name() == var ? 1 : 0;
    case Term::Kind::Add:
      return linear_occurrences(t.lhs(), var, ok) + linear_occurrences(t.rhs(), var, ok);
    case Term::Kind::Mul: {
      std::set<std::string> vs;
      term_vars_nat(t, vs);
      if (vs.count(var)) ok = false;
      return 0;
    }
  }
  return 0;
}

bool closed_except(const Term& t, const std::string& var, const NatAssignment& env) {
  std::set<std::string> vs;
  term_vars_nat(t, vs);
  for (const auto& v : vs)
    if (v != var && !env.count(v)) return false;
  return true;
}

/// Tries to read off the forced value of `var` from the ready conjuncts:
/// either an equation whose other side is determined, or a consecutive-squares
/// block  exists c, B(var, c) and c = var + R  which forces
/// var = ((R - 1)/2)^2 when R is odd.
std::optional<Int> solve_variable(const std::string& var,
                                  const std::vector<int>& ready,
                                  const ExistsSchedule& sched, const NatAssignment& env) {
  for (int ci : ready) {
    const NatFormula& c = sched.conjuncts[ci].f;
    if (c.kind() != NatFormula::Kind::Eq) continue;
    for (bool left : {true, false}) {
      const Term& pin = left ? c.lhs_term() : c.rhs_term();
      const Term& other = left ? c.rhs_term() : c.lhs_term();
      if (pin.kind() != Term::Kind::Var || pin.var_name() != var) continue;
      std::set<std::string> vs;
      term_vars_nat(other, vs);
      if (vs.count(var)) continue;
      bool closed = true;
      for (const auto& v : vs)
        if (!env.count(v)) {
          closed = false;
          break;
        }
      if (!closed) continue;
      Int val = eval_term_nat(other, env);
      if (val >= 0) return val;
    }
  }

  for (int ci : ready) {
    const NatFormula& c = sched.conjuncts[ci].f;
    if (c.kind() != NatFormula::Kind::Exists || c.exists_vars().size() != 1) continue;
    const std::string& cv = c.exists_vars()[0];
    if (cv == var) continue;
    std::vector<NatFormula> flat;
    flatten_and(c.exists_body(), flat);
    if (flat.size() != 2) continue;
    const NatFormula* b_atom = nullptr;
    const NatFormula* eq_atom = nullptr;
    for (const auto& g : flat) {
      if (g.kind() == NatFormula::Kind::B) b_atom = &g;
      if (g.kind() == NatFormula::Kind::Eq) eq_atom = &g;
    }
    if (!b_atom || !eq_atom) continue;
    if (b_atom->lhs_term().kind() != Term::Kind::Var ||
        b_atom->lhs_term().var_name() != var ||
        b_atom->rhs_term().kind() != Term::Kind::Var ||
        b_atom->rhs_term().var_name() != cv)
      continue;
    const Term* rhs = nullptr;
    if (eq_atom->lhs_term().kind() == Term::Kind::Var &&
        eq_atom->lhs_term().var_name() == cv)
      rhs = &eq_atom->rhs_term();
    else if (eq_atom->rhs_term().kind() == Term::Kind::Var &&
             eq_atom->rhs_term().var_name() == cv)
      rhs = &eq_atom->lhs_term();
    if (!rhs) continue;
    std::set<std::string> rhs_vars;
    term_vars_nat(*rhs, rhs_vars);
    if (rhs_vars.count(cv)) continue;
    bool linear = true;
    if (linear_occurrences(*rhs, var, linear) != 1 || !linear) continue;
    if (!closed_except(*rhs, var, env)) continue;
    NatAssignment probe = env;
    probe[var] = 0;
    Int r = eval_term_nat(*rhs, probe);
    if (r < 1 || mpz_even_p(r.get_mpz_t())) continue;
    Int k = (r - 1) / 2;
    return Int(k * k);
  }
  return std::nullopt;
}

bool bind_exists(const NatFormula& ex, const ExistsSchedule& sched, std::size_t idx,
                 NatAssignment& env, const Int& bound) {
  const auto& vars = ex.exists_vars();
  if (idx == vars.size()) return true;  // every conjunct was checked on the way down
  const std::string& v = vars[idx];
  const auto& ready = sched.ready_after[idx + 1];

  std::optional<Int> shadowed;
  if (auto it = env.find(v); it != env.end()) shadowed = it->second;
  auto restore = [&] {
    if (shadowed)
      env[v] = *shadowed;
    else
      env.erase(v);
  };
  auto attempt = [&](const Int& val) -> bool {
    env[v] = val;
    for (int ci : ready)
      if (!eval_search(sched.conjuncts[ci].f, env, bound)) {
        restore();
        return false;
      }
    if (bind_exists(ex, sched, idx + 1, env, bound)) return true;
    restore();
    return false;
  };

  if (auto solved = solve_variable(v, ready, sched, env)) return attempt(*solved);
  for (Int val(0); val <= bound; val += 1)
    if (attempt(val)) return true;
  return false;
}

bool eval_search(const NatFormula& f, NatAssignment& env, const Int& bound) {
  switch (f.kind()) {
    case NatFormula::Kind::Eq:
      return eval_term_nat(f.lhs_term(), env) == eval_term_nat(f.rhs_term(), env);
    case NatFormula::Kind::B:
      return holds_b_rel(eval_term_nat(f.lhs_term(), env), eval_term_nat(f.rhs_term(), env));
    case NatFormula::Kind::And:
      return eval_search(f.lhs(), env, bound) && eval_search(f.rhs(), env, bound);
    case NatFormula::Kind::Or:
      return eval_search(f.lhs(), env, bound) || eval_search(f.rhs(), env, bound);
    case NatFormula::Kind::Exists: {
      auto sched = schedule_for(f);
      // Conjuncts with no local variables gate the whole search.
      for (int ci : sched->ready_after[0])
        if (!eval_search(sched->conjuncts[ci].f, env, bound)) return false;
      return bind_exists(f, *sched, 0, env, bound);
    }
  }
  return false;
}

}  // namespace

bool nat_eval(const NatFormula& f, const Int& bound) {
  if (bound < 0) throw Error("nat_eval: requires bound >= 0");
  std::set<std::string> b, free, all;
  nat_vars_rec(f, b, free, all);
  if (!free.empty())
    throw Error("nat_eval: formula has free variable \"" + *free.begin() + "\"");
  NatAssignment env;
  return eval_search(f, env, bound);
}

bool nat_check(const NatFormula& f, const NatAssignment& env) {
  switch (f.kind()) {
    case NatFormula::Kind::Eq:
      return eval_term_nat(f.lhs_term(), env) == eval_term_nat(f.rhs_term(), env);
    case NatFormula::Kind::B:
      return holds_b_rel(eval_term_nat(f.lhs_term(), env), eval_term_nat(f.rhs_term(), env));
    case NatFormula::Kind::And:
      return nat_check(f.lhs(), env) && nat_check(f.rhs(), env);
    case NatFormula::Kind::Or:
      return nat_check(f.lhs(), env) || nat_check(f.rhs(), env);
    case NatFormula::Kind::Exists:
      return nat_check(f.exists_body(), env);
  }
  return false;
}

std::set<std::string> nat_free_vars(const NatFormula& f) {
  std::set<std::string> bound, free, all;
  nat_vars_rec(f, bound, free, all);
  return free;
}

// ---------------------------------------------------------------------------
// Multiplication elimination

namespace {

struct IntroducedVar {
  std::string name;
  std::function<Int(const NatAssignment&)> value;
};

struct ElimContext {
  FreshNames fresh{"m"};
  std::vector<IntroducedVar> introduced;
};

/// sigma(s, t): t = s^2, via exists c, B(t, c) and c = t + s + s + 1.
NatFormula sigma_rel(const Term& s, const Term& t, ElimContext& ctx) {
  std::string c = ctx.fresh.next();
  // The explicit return type forces evaluation of the gmp expression template
  // before its operands go out of scope.
  ctx.introduced.push_back({c, [t, s](const NatAssignment& env) -> Int {
                              return eval_term_nat(t, env) + 2 * eval_term_nat(s, env) + 1;
                            }});
  Term cv = Term::var(c);
  NatFormula b = NatFormula::b_rel(t, cv);
  NatFormula lin = NatFormula::eq(cv, Term::add(Term::add(t, s), Term::add(s, Term::one())));
  return NatFormula::exists({c}, NatFormula::logical_and(b, lin));
}

/// x*y = z over {0,1,+,B,=}: exists u v w with sigma(x,u), sigma(y,v),
/// sigma(x+y,w), w = u + z + z + v.
NatFormula mul_rel(const Term& x, const Term& y, const Term& z, ElimContext& ctx) {
  std::string u = ctx.fresh.next(), v = ctx.fresh.next(), w = ctx.fresh.next();
  ctx.introduced.push_back({u, [x](const NatAssignment& env) -> Int {
                              Int a = eval_term_nat(x, env);
                              return a * a;
                            }});
  ctx.introduced.push_back({v, [y](const NatAssignment& env) -> Int {
                              Int a = eval_term_nat(y, env);
                              return a * a;
                            }});
  ctx.introduced.push_back({w, [x, y](const NatAssignment& env) -> Int {
                              Int a = eval_term_nat(x, env) + eval_term_nat(y, env);
                              return a * a;
                            }});
  Term uv = Term::var(u), vv = Term::var(v), wv = Term::var(w);
  std::vector<NatFormula> parts;
  parts.push_back(sigma_rel(x, uv, ctx));
  parts.push_back(sigma_rel(y, vv, ctx));
  parts.push_back(sigma_rel(Term::add(x, y), wv, ctx));
  parts.push_back(NatFormula::eq(wv, Term::add(Term::add(uv, z), Term::add(z, vv))));
  return NatFormula::exists({u, v, w}, nat_and_all(std::move(parts)));
}

Term rewrite_term(const Term& t, ElimContext& ctx, std::vector<NatFormula>& constraints,
                  std::vector<std::string>& new_vars) {
  switch (t.kind()) {
    case Term::Kind::Zero:
    case Term::Kind::One:
    case Term::Kind::Var:
      return t;
    case Term::Kind::Add:
      return Term::add(rewrite_term(t.lhs(), ctx, constraints, new_vars),
                       rewrite_term(t.rhs(), ctx, constraints, new_vars));
    case Term::Kind::Mul: {
      Term a = rewrite_term(t.lhs(), ctx, constraints, new_vars);
      Term b = rewrite_term(t.rhs(), ctx, constraints, new_vars);
      std::string m = ctx.fresh.next();
      ctx.introduced.push_back({m, [a, b](const NatAssignment& env) -> Int {
                                  return eval_term_nat(a, env) * eval_term_nat(b, env);
                                }});
      new_vars.push_back(m);
      constraints.push_back(mul_rel(a, b, Term::var(m), ctx));
      return Term::var(m);
    }
  }
  return t;
}

NatFormula eliminate_rec(const NatFormula& f, ElimContext& ctx) {
  switch (f.kind()) {
    case NatFormula::Kind::Eq:
    case NatFormula::Kind::B: {
      std::vector<NatFormula> constraints;
      std::vector<std::string> new_vars;
      Term l = rewrite_term(f.lhs_term(), ctx, constraints, new_vars);
      Term r = rewrite_term(f.rhs_term(), ctx, constraints, new_vars);
      NatFormula atom =
          f.kind() == NatFormula::Kind::Eq ? NatFormula::eq(l, r) : NatFormula::b_rel(l, r);
      if (constraints.empty()) return atom;
      constraints.push_back(atom);
      return NatFormula::exists(new_vars, nat_and_all(std::move(constraints)));
    }
    case NatFormula::Kind::And:
      return NatFormula::logical_and(eliminate_rec(f.lhs(), ctx), eliminate_rec(f.rhs(), ctx));
    case NatFormula::Kind::Or:
      return NatFormula::logical_or(eliminate_rec(f.lhs(), ctx), eliminate_rec(f.rhs(), ctx));
    case NatFormula::Kind::Exists:
      return NatFormula::exists(f.exists_vars(), eliminate_rec(f.exists_body(), ctx));
  }
  return f;
}

}  // namespace

NatFormula eliminate_mul(const NatFormula& f) {
  ElimContext ctx;
  return eliminate_rec(f, ctx);
}

// ---------------------------------------------------------------------------
// Compilation

namespace {

struct FlatNode {
  enum class K { Zero, One, Src, Add } kind = K::Zero;
  std::string qvar;
  std::string src;  // Src: the N-variable name
  int a = -1, b = -1;
  std::shared_ptr<ThetaZeroPlan> zero;
  std::shared_ptr<ThetaOnePlan> one;
  std::shared_ptr<ThetaAddPlan> add;
};

struct AtomRecipe {
  bool is_b = false;
  std::vector<FlatNode> nodes;
  int root_l = -1, root_r = -1;
  std::vector<std::string> introduced_qvars;
  std::shared_ptr<ThetaEqPlan> eq;
  std::shared_ptr<ThetaBPlan> b;
};

struct TransNode {
  enum class K { Atom, And, Or, Exists } kind = K::Atom;
  NatFormula src;
  AtomRecipe atom;
  std::vector<std::shared_ptr<TransNode>> kids;
  std::vector<std::pair<std::string, std::string>> binders;  // (N-var, Q-var)
  std::vector<std::shared_ptr<XnPlan>> binder_x4;
};

}  // namespace

struct CompileRecipe {
  std::vector<IntroducedVar> introduced;
  std::shared_ptr<TransNode> root;
  std::vector<std::pair<std::string, std::string>> free_binders;
  std::vector<std::shared_ptr<XnPlan>> free_x4;
};

namespace {

struct CompileContext {
  explicit CompileContext(const Profile& p) : profile(p) {}
  const Profile& profile;
  FreshNames qfresh{"v"};
  FreshNames gfresh{"g"};
  std::map<std::string, std::string> var_map;
  std::vector<std::string> inventory;
};

std::string map_nat_var(CompileContext& ctx, const std::string& nvar) {
  auto it = ctx.var_map.find(nvar);
  if (it != ctx.var_map.end())
    throw Error("compile: variable \"" + nvar + "\" is bound twice (shadowing is not supported)");
  std::string q = ctx.qfresh.next();
  ctx.var_map.emplace(nvar, q);
  return q;
}

/// Flattens a x-free term into gadget-constrained nodes; returns (root index,
/// per-node formulas for the introduced constants/sums).
int flatten_term(const Term& t, CompileContext& ctx, AtomRecipe& recipe,
                 std::vector<Formula>& parts, FreshNames& fresh) {
  switch (t.kind()) {
    case Term::Kind::Zero: {
      FlatNode n;
      n.kind = FlatNode::K::Zero;
      n.qvar = ctx.qfresh.next();
      n.zero = std::make_shared<ThetaZeroPlan>();
      parts.push_back(build_theta_zero(Term::var(n.qvar), ctx.profile, fresh, *n.zero));
      recipe.introduced_qvars.push_back(n.qvar);
      ctx.inventory.push_back("zero");
      recipe.nodes.push_back(std::move(n));
      return static_cast<int>(recipe.nodes.size()) - 1;
    }
    case Term::Kind::One: {
      FlatNode n;
      n.kind = FlatNode::K::One;
      n.qvar = ctx.qfresh.next();
      n.one = std::make_shared<ThetaOnePlan>();
      parts.push_back(build_theta_one(Term::var(n.qvar), ctx.profile, fresh, *n.one));
      recipe.introduced_qvars.push_back(n.qvar);
      ctx.inventory.push_back("one");
      recipe.nodes.push_back(std::move(n));
      return static_cast<int>(recipe.nodes.size()) - 1;
    }
    case Term::Kind::Var: {
      auto it = ctx.var_map.find(t.var_name());
      if (it == ctx.var_map.end())
        throw Error("compile: unbound variable \"" + t.var_name() + "\"");
      FlatNode n;
      n.kind = FlatNode::K::Src;
      n.src = t.var_name();
      n.qvar = it->second;
      recipe.nodes.push_back(std::move(n));
      return static_cast<int>(recipe.nodes.size()) - 1;
    }
    case Term::Kind::Add: {
      int ia = flatten_term(t.lhs(), ctx, recipe, parts, fresh);
      int ib = flatten_term(t.rhs(), ctx, recipe, parts, fresh);
      FlatNode n;
      n.kind = FlatNode::K::Add;
      n.a = ia;
      n.b = ib;
      n.qvar = ctx.qfresh.next();
      n.add = std::make_shared<ThetaAddPlan>();
      parts.push_back(build_theta_add(Term::var(recipe.nodes[ia].qvar),
                                      Term::var(recipe.nodes[ib].qvar), Term::var(n.qvar),
                                      ctx.profile, fresh, *n.add));
      recipe.introduced_qvars.push_back(n.qvar);
      ctx.inventory.push_back("add");
      recipe.nodes.push_back(std::move(n));
      return static_cast<int>(recipe.nodes.size()) - 1;
    }
    case Term::Kind::Mul:
      throw Error("compile: multiplication survived eliminate_mul");
  }
  return -1;
}

std::pair<Formula, std::shared_ptr<TransNode>> translate(const NatFormula& f,
                                                         CompileContext& ctx) {
  auto node = std::make_shared<TransNode>();
  node->src = f;
  switch (f.kind()) {
    case NatFormula::Kind::Eq:
    case NatFormula::Kind::B: {
      node->kind = TransNode::K::Atom;
      node->atom.is_b = f.kind() == NatFormula::Kind::B;
      std::vector<Formula> parts;
      node->atom.root_l = flatten_term(f.lhs_term(), ctx, node->atom, parts, ctx.gfresh);
      node->atom.root_r = flatten_term(f.rhs_term(), ctx, node->atom, parts, ctx.gfresh);
      const std::string& ql = node->atom.nodes[node->atom.root_l].qvar;
      const std::string& qr = node->atom.nodes[node->atom.root_r].qvar;
      if (node->atom.is_b) {
        node->atom.b = std::make_shared<ThetaBPlan>();
        parts.push_back(
            build_theta_B(Term::var(ql), Term::var(qr), ctx.profile, ctx.gfresh, *node->atom.b));
        ctx.inventory.push_back("B");
      } else {
        node->atom.eq = std::make_shared<ThetaEqPlan>();
        parts.push_back(
            build_theta_eq(Term::var(ql), Term::var(qr), ctx.profile, ctx.gfresh, *node->atom.eq));
        ctx.inventory.push_back("eq");
      }
      Formula body = and_all(std::move(parts));
      Formula out = node->atom.introduced_qvars.empty()
                        ? body
                        : Formula::exists(node->atom.introduced_qvars, body);
      return {out, node};
    }
    case NatFormula::Kind::And:
    case NatFormula::Kind::Or: {
      node->kind = f.kind() == NatFormula::Kind::And ? TransNode::K::And : TransNode::K::Or;
      auto [la, ln] = translate(f.lhs(), ctx);
      auto [ra, rn] = translate(f.rhs(), ctx);
      node->kids = {ln, rn};
      Formula out = f.kind() == NatFormula::Kind::And ? Formula::logical_and(la, ra)
                                                      : Formula::logical_or(la, ra);
      return {out, node};
    }
    case NatFormula::Kind::Exists: {
      node->kind = TransNode::K::Exists;
      std::vector<Formula> parts;
      std::vector<std::string> qvars;
      for (const auto& nv : f.exists_vars()) {
        std::string qv = map_nat_var(ctx, nv);
        qvars.push_back(qv);
        node->binders.emplace_back(nv, qv);
        auto plan = std::make_shared<XnPlan>();
        parts.push_back(build_Xn(4, Term::var(qv), ctx.profile.multiplier, ctx.gfresh, *plan));
        node->binder_x4.push_back(plan);
        ctx.inventory.push_back("X4");
      }
      auto [body, bn] = translate(f.exists_body(), ctx);
      node->kids = {bn};
      parts.push_back(body);
      return {Formula::exists(qvars, and_all(std::move(parts))), node};
    }
  }
  throw Error("compile: unreachable");
}

}  // namespace

CompileOutput compile(const NatFormula& f, const Profile& profile) {
  for (const auto& v : [&] {
         std::set<std::string> b, fr, all;
         nat_vars_rec(f, b, fr, all);
         return all;
       }())
    if (!v.empty() && v[0] == '_')
      throw Error("compile: variable names starting with '_' are reserved");

  ElimContext ectx;
  NatFormula elim = eliminate_rec(f, ectx);

  CompileContext cctx(profile);
  // Free variables are mapped first, in name order, and relativized at the top.
  auto recipe = std::make_shared<CompileRecipe>();
  recipe->introduced = std::move(ectx.introduced);
  std::vector<Formula> top;
  for (const auto& nv : nat_free_vars(elim)) {
    std::string qv = map_nat_var(cctx, nv);
    recipe->free_binders.emplace_back(nv, qv);
    auto plan = std::make_shared<XnPlan>();
    top.push_back(build_Xn(4, Term::var(qv), profile.multiplier, cctx.gfresh, *plan));
    recipe->free_x4.push_back(plan);
    cctx.inventory.push_back("X4");
  }

  auto [body, root] = translate(elim, cctx);
  recipe->root = root;
  top.push_back(body);

  CompileOutput out;
  out.source = f;
  out.sentence = and_all(std::move(top));
  out.var_map = std::move(cctx.var_map);
  out.inventory = std::move(cctx.inventory);
  out.recipe = recipe;
  return out;
}

std::string CompileOutput::to_json(bool pretty) const {
  nlohmann::json j;
  j["source"] = render(source);
  j["sentence"] = render(sentence);
  j["var_map"] = nlohmann::json::object();
  for (const auto& [n, q] : var_map) j["var_map"][n] = q;
  j["inventory"] = inventory;
  return pretty ? j.dump(2) : j.dump();
}

// ---------------------------------------------------------------------------
// Witness translation

namespace {

struct WitnessBuilder {
  const Profile& profile;
  const NatAssignment& env;
  std::map<Int, X4Certificate> cert_cache;

  const X4Certificate& certificate(const Int& m) {
    auto it = cert_cache.find(m);
    if (it != cert_cache.end()) return it->second;
    return cert_cache.emplace(m, encode(m, profile)).first->second;
  }

  Int node_value(const AtomRecipe& recipe, int idx) {
    const FlatNode& n = recipe.nodes[idx];
    switch (n.kind) {
      case FlatNode::K::Zero:
        return Int(0);
      case FlatNode::K::One:
        return Int(1);
      case FlatNode::K::Src: {
        auto it = env.find(n.src);
        if (it == env.end()) throw WitnessError("witness_up: no value for \"" + n.src + "\"");
        return it->second;
      }
      case FlatNode::K::Add:
        return node_value(recipe, n.a) + node_value(recipe, n.b);
    }
    return Int(0);
  }

  void fill_atom(const AtomRecipe& recipe, Assignment& w) {
    std::vector<X4Certificate> certs(recipe.nodes.size());
    for (std::size_t i = 0; i < recipe.nodes.size(); ++i) {
      certs[i] = certificate(node_value(recipe, static_cast<int>(i)));
      const FlatNode& n = recipe.nodes[i];
      if (n.kind != FlatNode::K::Src) w.set(n.qvar, certs[i].q);
    }
    for (std::size_t i = 0; i < recipe.nodes.size(); ++i) {
      const FlatNode& n = recipe.nodes[i];
      switch (n.kind) {
        case FlatNode::K::Zero:
          fill_theta_zero(*n.zero, certs[i], profile, w);
          break;
        case FlatNode::K::One:
          fill_theta_one(*n.one, certs[i], profile, w);
          break;
        case FlatNode::K::Add:
          fill_theta_add(*n.add, certs[n.a], certs[n.b], certs[i], profile, w);
          break;
        case FlatNode::K::Src:
          break;
      }
    }
    if (recipe.is_b)
      fill_theta_B(*recipe.b, certs[recipe.root_l], certs[recipe.root_r], profile, w);
    else
      fill_theta_eq(*recipe.eq, certs[recipe.root_l], certs[recipe.root_r], profile, w);
  }

  void dummy_fill(const TransNode& node, Assignment& w) {
    std::vector<std::string> vars;
    collect_trans_vars(node, vars);
    for (const auto& v : vars)
      if (!w.contains(v)) w.set(v, Rational(0));
  }

  static void collect_trans_vars(const TransNode& node, std::vector<std::string>& out) {
    switch (node.kind) {
      case TransNode::K::Atom:
        for (const auto& n : node.atom.nodes)
          if (n.kind != FlatNode::K::Src) {
            out.push_back(n.qvar);
            if (n.zero) collect_vars(*n.zero, out);
            if (n.one) collect_vars(*n.one, out);
            if (n.add) collect_vars(*n.add, out);
          }
        if (node.atom.eq) collect_vars(*node.atom.eq, out);
        if (node.atom.b) collect_vars(*node.atom.b, out);
        return;
      case TransNode::K::And:
      case TransNode::K::Or:
        collect_trans_vars(*node.kids[0], out);
        collect_trans_vars(*node.kids[1], out);
        return;
      case TransNode::K::Exists:
        for (const auto& [nv, qv] : node.binders) out.push_back(qv);
        for (const auto& plan : node.binder_x4) collect_vars(*plan, out);
        collect_trans_vars(*node.kids[0], out);
        return;
    }
  }

  void walk(const TransNode& node, Assignment& w) {
    switch (node.kind) {
      case TransNode::K::Atom:
        fill_atom(node.atom, w);
        return;
      case TransNode::K::And:
        walk(*node.kids[0], w);
        walk(*node.kids[1], w);
        return;
      case TransNode::K::Or: {
        bool left_true = nat_check(node.kids[0]->src, env);
        const TransNode& taken = left_true ? *node.kids[0] : *node.kids[1];
        const TransNode& other = left_true ? *node.kids[1] : *node.kids[0];
        if (!left_true && !nat_check(node.kids[1]->src, env))
          throw RefusalError("witness_up: neither disjunct holds over N");
        walk(taken, w);
        dummy_fill(other, w);
        return;
      }
      case TransNode::K::Exists: {
        for (std::size_t i = 0; i < node.binders.size(); ++i) {
          const auto& [nv, qv] = node.binders[i];
          auto it = env.find(nv);
          if (it == env.end()) throw WitnessError("witness_up: no value for \"" + nv + "\"");
          const X4Certificate& cert = certificate(it->second);
          w.set(qv, cert.q);
          fill_X4_certificate(*node.binder_x4[i], cert, profile.multiplier, w);
        }
        walk(*node.kids[0], w);
        return;
      }
    }
  }
};

}  // namespace

Assignment witness_up(const CompileOutput& out, const NatAssignment& a, const Profile& profile) {
  if (!out.recipe) throw Error("witness_up: compile output carries no recipe");
  for (const auto& [name, val] : a) {
    if (val < 0) throw RefusalError("witness_up: negative value for \"" + name + "\"");
    if (val > profile.m_max)
      throw Error("witness_up: value for \"" + name + "\" exceeds m_max");
  }
  if (!nat_check(out.source, a))
    throw RefusalError("witness_up: the assignment does not satisfy the formula over N");

  NatAssignment env = a;
  for (const auto& iv : out.recipe->introduced) env[iv.name] = iv.value(env);
  for (const auto& [name, val] : env)
    if (val > profile.m_max)
      throw Error("witness_up: derived value for \"" + name + "\" exceeds m_max");

  WitnessBuilder builder{profile, env, {}};
  Assignment w;
  for (std::size_t i = 0; i < out.recipe->free_binders.size(); ++i) {
    const auto& [nv, qv] = out.recipe->free_binders[i];
    auto it = env.find(nv);
    if (it == env.end()) throw WitnessError("witness_up: no value for \"" + nv + "\"");
    const X4Certificate& cert = builder.certificate(it->second);
    w.set(qv, cert.q);
    fill_X4_certificate(*out.recipe->free_x4[i], cert, profile.multiplier, w);
  }
  builder.walk(*out.recipe->root, w);
  return w;
}

NatAssignment witness_down(const Assignment& w, const CompileOutput& out, const Profile& profile) {
  if (!check_witness(out.sentence, w))
    throw WitnessError("witness_down: the witness is rejected by the sentence");
  NatAssignment result;
  for (const auto& [nv, qv] : out.var_map) {
    const Rational* val = w.find(qv);
    if (!val) throw WitnessError("witness_down: witness does not assign \"" + qv + "\"");
    result[nv] = decode(*val, profile);
  }
  if (!nat_check(out.source, result))
    throw Error("witness_down: decoded assignment fails the source formula");
  return result;
}

}  // namespace heightinterp
