#include "heightinterp/formula.hpp"

#include <pthread.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <utility>

#include "json.hpp"

namespace heightinterp {

namespace {

// Deep structures (binary-expanded integer literals reach depths in the tens
// of thousands) are processed on a dedicated thread with a large stack.
constexpr std::uint32_t kDeepDepth = 1500;
constexpr std::size_t kDeepStackBytes = std::size_t(1) << 30;

void run_deep(const std::function<void()>& fn) {
  struct Ctx {
    const std::function<void()>* fn;
    std::exception_ptr err;
  } ctx{&fn, nullptr};

  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, kDeepStackBytes);
  pthread_t tid;
  auto entry = [](void* arg) -> void* {
    auto* c = static_cast<Ctx*>(arg);
    try {
      (*c->fn)();
    } catch (...) {
      c->err = std::current_exception();
    }
    return nullptr;
  };
  if (pthread_create(&tid, &attr, entry, &ctx) != 0) {
    pthread_attr_destroy(&attr);
    fn();  // fall back to the caller's stack
    return;
  }
  pthread_join(tid, nullptr);
  pthread_attr_destroy(&attr);
  if (ctx.err) std::rethrow_exception(ctx.err);
}

template <typename T>
T deep_guarded(std::uint32_t depth, const std::function<T()>& fn) {
  if (depth < kDeepDepth) return fn();
  std::optional<T> out;
  run_deep([&] { out = fn(); });
  return std::move(*out);
}

}  // namespace

// ---------------------------------------------------------------------------
// Term

struct Term::Node {
  Kind kind;
  std::string name;                // Var
  std::shared_ptr<const Node> a;   // Add/Mul
  std::shared_ptr<const Node> b;
  std::uint32_t depth = 1;

  ~Node() {
    // Iterative teardown: linear literal chains would otherwise recurse.
    std::vector<std::shared_ptr<const Node>> stack;
    stack.push_back(std::move(a));
    stack.push_back(std::move(b));
    while (!stack.empty()) {
      std::shared_ptr<const Node> p = std::move(stack.back());
      stack.pop_back();
      if (p && p.use_count() == 1) {
        auto* n = const_cast<Node*>(p.get());
        stack.push_back(std::move(n->a));
        stack.push_back(std::move(n->b));
      }
    }
  }
};

namespace {

std::shared_ptr<const Term::Node> make_leaf(Term::Kind k, std::string name = {}) {
  auto n = std::make_shared<Term::Node>();
  n->kind = k;
  n->name = std::move(name);
  return n;
}

}  // namespace

Term Term::var(std::string name) {
  if (name.empty()) throw Error("Term::var: empty name");
  return Term(make_leaf(Kind::Var, std::move(name)));
}

Term Term::zero() {
  static const std::shared_ptr<const Node> z = make_leaf(Kind::Zero);
  return Term(z);
}

Term Term::one() {
  static const std::shared_ptr<const Node> o = make_leaf(Kind::One);
  return Term(o);
}

Term Term::add(Term a, Term b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Add;
  n->depth = 1 + std::max(a.node_->depth, b.node_->depth);
  n->a = std::move(a.node_);
  n->b = std::move(b.node_);
  return Term(std::move(n));
}

Term Term::mul(Term a, Term b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Mul;
  n->depth = 1 + std::max(a.node_->depth, b.node_->depth);
  n->a = std::move(a.node_);
  n->b = std::move(b.node_);
  return Term(std::move(n));
}

Term Term::integer(const Int& n) {
  if (n < 0) throw Error("Term::integer: negative literal");
  if (n == 0) return zero();
  if (n == 1) return one();
  Term two = add(one(), one());
  auto doubled = [&two](const Term& t) {
    return t.kind() == Kind::One ? two : mul(two, t);
  };
  std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  Term acc = one();
  for (long i = static_cast<long>(bits) - 2; i >= 0; --i) {
    acc = doubled(acc);
    if (mpz_tstbit(n.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = add(acc, one());
  }
  return acc;
}

Term::Kind Term::kind() const { return node_->kind; }

const std::string& Term::var_name() const {
  if (node_->kind != Kind::Var) throw Error("Term: not a variable");
  return node_->name;
}

Term Term::lhs() const {
  if (node_->kind != Kind::Add && node_->kind != Kind::Mul) throw Error("Term: no children");
  return Term(node_->a);
}

Term Term::rhs() const {
  if (node_->kind != Kind::Add && node_->kind != Kind::Mul) throw Error("Term: no children");
  return Term(node_->b);
}

std::uint32_t Term::depth() const { return node_->depth; }

namespace {

bool term_eq_rec(const Term& a, const Term& b) {
  if (&a == &b) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Zero:
    case Term::Kind::One:
      return true;
    case Term::Kind::Var:
      return a.var_name() == b.var_name();
    case Term::Kind::Add:
    case Term::Kind::Mul:
      return term_eq_rec(a.lhs(), b.lhs()) && term_eq_rec(a.rhs(), b.rhs());
  }
  return false;
}

}  // namespace

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  return deep_guarded<bool>(std::max(a.depth(), b.depth()),
                            [&] { return term_eq_rec(a, b); });
}

// ---------------------------------------------------------------------------
// Formula

struct Formula::Node {
  Kind kind;
  Term t1, t2;                     // Eq
  std::vector<Term> xs, ys;        // H
  std::shared_ptr<const Node> f1;  // And/Or lhs, Exists body
  std::shared_ptr<const Node> f2;  // And/Or rhs
  std::vector<std::string> vars;   // Exists
  std::uint32_t depth = 1;

  ~Node() {
    std::vector<std::shared_ptr<const Node>> stack;
    stack.push_back(std::move(f1));
    stack.push_back(std::move(f2));
    while (!stack.empty()) {
      std::shared_ptr<const Node> p = std::move(stack.back());
      stack.pop_back();
      if (p && p.use_count() == 1) {
        auto* n = const_cast<Node*>(p.get());
        stack.push_back(std::move(n->f1));
        stack.push_back(std::move(n->f2));
      }
    }
  }
};

Formula Formula::eq(Term a, Term b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Eq;
  n->depth = 1 + std::max(a.depth(), b.depth());
  n->t1 = std::move(a);
  n->t2 = std::move(b);
  return Formula(std::move(n));
}

Formula Formula::h(std::vector<Term> xs, std::vector<Term> ys) {
  if (xs.empty() || ys.empty()) throw Error("Formula::h: tuples must be nonempty");
  auto n = std::make_shared<Node>();
  n->kind = Kind::H;
  std::uint32_t d = 0;
  for (const auto& t : xs) d = std::max(d, t.depth());
  for (const auto& t : ys) d = std::max(d, t.depth());
  n->depth = 1 + d;
  n->xs = std::move(xs);
  n->ys = std::move(ys);
  return Formula(std::move(n));
}

Formula Formula::logical_and(Formula a, Formula b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->depth = 1 + std::max(a.node_->depth, b.node_->depth);
  n->f1 = std::move(a.node_);
  n->f2 = std::move(b.node_);
  return Formula(std::move(n));
}

Formula Formula::logical_or(Formula a, Formula b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->depth = 1 + std::max(a.node_->depth, b.node_->depth);
  n->f1 = std::move(a.node_);
  n->f2 = std::move(b.node_);
  return Formula(std::move(n));
}

Formula Formula::exists(std::vector<std::string> vars, Formula body) {
  if (vars.empty()) throw Error("Formula::exists: empty variable list");
  for (const auto& v : vars)
    if (v.empty()) throw Error("Formula::exists: empty variable name");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Exists;
  n->depth = 1 + body.node_->depth;
  n->f1 = std::move(body.node_);
  n->vars = std::move(vars);
  return Formula(std::move(n));
}

Formula::Kind Formula::kind() const { return node_->kind; }

const Term& Formula::eq_lhs() const {
  if (node_->kind != Kind::Eq) throw Error("Formula: not an equality");
  return node_->t1;
}
const Term& Formula::eq_rhs() const {
  if (node_->kind != Kind::Eq) throw Error("Formula: not an equality");
  return node_->t2;
}
const std::vector<Term>& Formula::h_xs() const {
  if (node_->kind != Kind::H) throw Error("Formula: not an H atom");
  return node_->xs;
}
const std::vector<Term>& Formula::h_ys() const {
  if (node_->kind != Kind::H) throw Error("Formula: not an H atom");
  return node_->ys;
}
Formula Formula::lhs() const {
  if (node_->kind != Kind::And && node_->kind != Kind::Or) throw Error("Formula: no lhs");
  return Formula(node_->f1);
}
Formula Formula::rhs() const {
  if (node_->kind != Kind::And && node_->kind != Kind::Or) throw Error("Formula: no rhs");
  return Formula(node_->f2);
}
const std::vector<std::string>& Formula::exists_vars() const {
  if (node_->kind != Kind::Exists) throw Error("Formula: not a quantifier");
  return node_->vars;
}
Formula Formula::exists_body() const {
  if (node_->kind != Kind::Exists) throw Error("Formula: not a quantifier");
  return Formula(node_->f1);
}

std::uint32_t Formula::depth() const { return node_->depth; }

namespace {

bool formula_eq_rec(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Formula::Kind::Eq:
      return term_eq_rec(a.eq_lhs(), b.eq_lhs()) && term_eq_rec(a.eq_rhs(), b.eq_rhs());
    case Formula::Kind::H: {
      if (a.h_xs().size() != b.h_xs().size() || a.h_ys().size() != b.h_ys().size()) return false;
      for (std::size_t i = 0; i < a.h_xs().size(); ++i)
        if (!term_eq_rec(a.h_xs()[i], b.h_xs()[i])) return false;
      for (std::size_t i = 0; i < a.h_ys().size(); ++i)
        if (!term_eq_rec(a.h_ys()[i], b.h_ys()[i])) return false;
      return true;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return formula_eq_rec(a.lhs(), b.lhs()) && formula_eq_rec(a.rhs(), b.rhs());
    case Formula::Kind::Exists:
      return a.exists_vars() == b.exists_vars() && formula_eq_rec(a.exists_body(), b.exists_body());
  }
  return false;
}

}  // namespace

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  return deep_guarded<bool>(std::max(a.depth(), b.depth()),
                            [&] { return formula_eq_rec(a, b); });
}

Formula and_all(std::vector<Formula> fs) {
  if (fs.empty()) throw Error("and_all: empty list");
  // Balanced fold keeps evaluation and rendering depth logarithmic.
  while (fs.size() > 1) {
    std::vector<Formula> next;
    next.reserve(fs.size() / 2 + 1);
    for (std::size_t i = 0; i + 1 < fs.size(); i += 2)
      next.push_back(Formula::logical_and(fs[i], fs[i + 1]));
    if (fs.size() % 2) next.push_back(fs.back());
    fs = std::move(next);
  }
  return fs[0];
}

Formula or_all(std::vector<Formula> fs) {
  if (fs.empty()) throw Error("or_all: empty list");
  while (fs.size() > 1) {
    std::vector<Formula> next;
    next.reserve(fs.size() / 2 + 1);
    for (std::size_t i = 0; i + 1 < fs.size(); i += 2)
      next.push_back(Formula::logical_or(fs[i], fs[i + 1]));
    if (fs.size() % 2) next.push_back(fs.back());
    fs = std::move(next);
  }
  return fs[0];
}

// ---------------------------------------------------------------------------
// Assignment

const Rational* Assignment::find(const std::string& name) const {
  auto it = values_.find(name);
  return it == values_.end() ? nullptr : &it->second;
}

void Assignment::merge(const Assignment& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string Assignment::to_json(bool pretty) const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v.str();
  return pretty ? j.dump(2) : j.dump();
}

Assignment Assignment::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw Error("Assignment: JSON must be an object");
  Assignment a;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_string())
      a.set(it.key(), Rational::from_string(it.value().get<std::string>()));
    else if (it.value().is_number_integer())
      a.set(it.key(), Rational(Int(std::to_string(it.value().get<long long>()))));
    else
      throw Error("Assignment: value for \"" + it.key() + "\" must be a rational string");
  }
  return a;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum class Type { LParen, RParen, Symbol, Integer, End } type;
  std::string sym;
  Int num;
  std::size_t offset = 0;
};

bool is_symbol_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
}

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) {}

  const Token& peek() {
    if (!buffered_) {
      cur_ = lex();
      buffered_ = true;
    }
    return cur_;
  }

  Token next() {
    peek();
    buffered_ = false;
    return cur_;
  }

private:
  Token lex() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    Token t;
    t.offset = pos_;
    if (pos_ >= text_.size()) {
      t.type = Token::Type::End;
      return t;
    }
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      t.type = Token::Type::LParen;
      return t;
    }
    if (c == ')') {
      ++pos_;
      t.type = Token::Type::RParen;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      t.type = Token::Type::Integer;
      t.num = Int(text_.substr(start, pos_ - start));
      return t;
    }
    if (c == '+' || c == '*' || c == '=') {
      ++pos_;
      t.type = Token::Type::Symbol;
      t.sym = std::string(1, c);
      return t;
    }
    if (c == '-')
      throw ParseError("negative literals are not part of the term language", pos_);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && is_symbol_char(text_[pos_])) ++pos_;
      t.type = Token::Type::Symbol;
      t.sym = text_.substr(start, pos_ - start);
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token cur_;
  bool buffered_ = false;
};

class Parser {
public:
  explicit Parser(const std::string& text) : lex_(text) {}

  Formula formula_toplevel() {
    Formula f = formula();
    expect_end();
    return f;
  }

  Term term_toplevel() {
    Term t = term();
    expect_end();
    return t;
  }

private:
  void expect_end() {
    const Token& t = lex_.peek();
    if (t.type != Token::Type::End) throw ParseError("trailing input after expression", t.offset);
  }

  Token expect(Token::Type type, const char* what) {
    Token t = lex_.next();
    if (t.type != type) throw ParseError(std::string("expected ") + what, t.offset);
    return t;
  }

  long small_int(const char* what) {
    Token t = lex_.next();
    if (t.type != Token::Type::Integer || t.num > 1000000)
      throw ParseError(std::string("expected ") + what, t.offset);
    return t.num.get_si();
  }

  Term term() {
    Token t = lex_.next();
    switch (t.type) {
      case Token::Type::Integer:
        return Term::integer(t.num);
      case Token::Type::Symbol:
        if (t.sym == "+" || t.sym == "*" || t.sym == "=")
          throw ParseError("operator outside parentheses", t.offset);
        return Term::var(t.sym);
      case Token::Type::LParen: {
        Token op = expect(Token::Type::Symbol, "term operator '+' or '*'");
        if (op.sym != "+" && op.sym != "*")
          throw ParseError("unknown term operator '" + op.sym + "'", op.offset);
        Term a = term();
        Term b = term();
        expect(Token::Type::RParen, "')'");
        return op.sym == "+" ? Term::add(a, b) : Term::mul(a, b);
      }
      default:
        throw ParseError("expected a term", t.offset);
    }
  }

  std::vector<Term> term_list() {
    expect(Token::Type::LParen, "'('");
    std::vector<Term> out;
    while (lex_.peek().type != Token::Type::RParen) {
      if (lex_.peek().type == Token::Type::End)
        throw ParseError("unterminated term list", lex_.peek().offset);
      out.push_back(term());
    }
    lex_.next();
    return out;
  }

  Formula formula() {
    Token t = expect(Token::Type::LParen, "'('");
    Token op = lex_.next();
    if (op.type != Token::Type::Symbol) throw ParseError("expected a formula head", op.offset);
    if (op.sym == "=") {
      Term a = term();
      Term b = term();
      expect(Token::Type::RParen, "')'");
      return Formula::eq(a, b);
    }
    if (op.sym == "H") {
      long m = small_int("arity m");
      long n = small_int("arity n");
      std::size_t list_at = lex_.peek().offset;
      std::vector<Term> xs = term_list();
      std::vector<Term> ys = term_list();
      if (m < 1 || n < 1 || static_cast<long>(xs.size()) != m || static_cast<long>(ys.size()) != n)
        throw ParseError("H atom arity mismatch", list_at);
      expect(Token::Type::RParen, "')'");
      return Formula::h(std::move(xs), std::move(ys));
    }
    if (op.sym == "and" || op.sym == "or") {
      Formula a = formula();
      Formula b = formula();
      expect(Token::Type::RParen, "')'");
      return op.sym == "and" ? Formula::logical_and(a, b) : Formula::logical_or(a, b);
    }
    if (op.sym == "exists") {
      expect(Token::Type::LParen, "'('");
      std::vector<std::string> vars;
      while (lex_.peek().type == Token::Type::Symbol) vars.push_back(lex_.next().sym);
      expect(Token::Type::RParen, "')'");
      if (vars.empty()) throw ParseError("exists needs at least one variable", op.offset);
      Formula body = formula();
      expect(Token::Type::RParen, "')'");
      return Formula::exists(std::move(vars), body);
    }
    throw ParseError("unknown formula head '" + op.sym + "'", op.offset);
  }

  Lexer lex_;
};

std::size_t max_paren_depth(const std::string& text) {
  std::size_t d = 0, best = 0;
  for (char c : text) {
    if (c == '(') best = std::max(best, ++d);
    if (c == ')' && d > 0) --d;
  }
  return best;
}

}  // namespace

Formula parse_formula(const std::string& text) {
  return deep_guarded<Formula>(static_cast<std::uint32_t>(std::min<std::size_t>(
                                   max_paren_depth(text), 1u << 30)),
                               [&] { return Parser(text).formula_toplevel(); });
}

Term parse_term(const std::string& text) {
  return deep_guarded<Term>(static_cast<std::uint32_t>(std::min<std::size_t>(
                                max_paren_depth(text), 1u << 30)),
                            [&] { return Parser(text).term_toplevel(); });
}

// ---------------------------------------------------------------------------
// Render

namespace {

void render_term_rec(const Term& t, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::Zero:
      out += '0';
      return;
    case Term::Kind::One:
      out += '1';
      return;
    case Term::Kind::Var:
      out += t.var_name();
      return;
    case Term::Kind::Add:
    case Term::Kind::Mul:
      out += t.kind() == Term::Kind::Add ? "(+ " : "(* ";
      render_term_rec(t.lhs(), out);
      out += ' ';
      render_term_rec(t.rhs(), out);
      out += ')';
      return;
  }
}

void render_formula_rec(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::Eq:
      out += "(= ";
      render_term_rec(f.eq_lhs(), out);
      out += ' ';
      render_term_rec(f.eq_rhs(), out);
      out += ')';
      return;
    case Formula::Kind::H: {
      out += "(H " + std::to_string(f.h_xs().size()) + ' ' + std::to_string(f.h_ys().size()) + " (";
      bool first = true;
      for (const auto& t : f.h_xs()) {
        if (!first) out += ' ';
        first = false;
        render_term_rec(t, out);
      }
      out += ") (";
      first = true;
      for (const auto& t : f.h_ys()) {
        if (!first) out += ' ';
        first = false;
        render_term_rec(t, out);
      }
      out += "))";
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
      out += f.kind() == Formula::Kind::And ? "(and " : "(or ";
      render_formula_rec(f.lhs(), out);
      out += ' ';
      render_formula_rec(f.rhs(), out);
      out += ')';
      return;
    case Formula::Kind::Exists: {
      out += "(exists (";
      bool first = true;
      for (const auto& v : f.exists_vars()) {
        if (!first) out += ' ';
        first = false;
        out += v;
      }
      out += ") ";
      render_formula_rec(f.exists_body(), out);
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string render(const Formula& f) {
  return deep_guarded<std::string>(f.depth(), [&] {
    std::string out;
    render_formula_rec(f, out);
    return out;
  });
}

std::string render(const Term& t) {
  return deep_guarded<std::string>(t.depth(), [&] {
    std::string out;
    render_term_rec(t, out);
    return out;
  });
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// Three-valued verdict: an unassigned variable only matters if the overall
// truth value depends on it.
struct Tri {
  enum class V { True, False, Missing } v;
  std::string missing;

  static Tri yes() { return {V::True, {}}; }
  static Tri no() { return {V::False, {}}; }
  static Tri unknown(std::string name) { return {V::Missing, std::move(name)}; }
};

std::optional<Rational> eval_term_rec(const Term& t, const Assignment& w, std::string& missing) {
  switch (t.kind()) {
    case Term::Kind::Zero:
      return Rational(0);
    case Term::Kind::One:
      return Rational(1);
    case Term::Kind::Var: {
      const Rational* r = w.find(t.var_name());
      if (!r) {
        if (missing.empty()) missing = t.var_name();
        return std::nullopt;
      }
      return *r;
    }
    case Term::Kind::Add:
    case Term::Kind::Mul: {
      auto a = eval_term_rec(t.lhs(), w, missing);
      auto b = eval_term_rec(t.rhs(), w, missing);
      if (!a || !b) return std::nullopt;
      return t.kind() == Term::Kind::Add ? *a + *b : *a * *b;
    }
  }
  return std::nullopt;
}

std::optional<std::vector<Rational>> eval_tuple(const std::vector<Term>& ts, const Assignment& w,
                                                std::string& missing) {
  std::vector<Rational> out;
  out.reserve(ts.size());
  for (const auto& t : ts) {
    auto v = eval_term_rec(t, w, missing);
    if (!v) return std::nullopt;
    out.push_back(std::move(*v));
  }
  return out;
}

Tri check_rec(const Formula& f, const Assignment& w) {
  switch (f.kind()) {
    case Formula::Kind::Eq: {
      std::string missing;
      auto a = eval_term_rec(f.eq_lhs(), w, missing);
      auto b = eval_term_rec(f.eq_rhs(), w, missing);
      if (!a || !b) return Tri::unknown(missing);
      return *a == *b ? Tri::yes() : Tri::no();
    }
    case Formula::Kind::H: {
      std::string missing;
      auto xs = eval_tuple(f.h_xs(), w, missing);
      auto ys = eval_tuple(f.h_ys(), w, missing);
      if (!xs || !ys) return Tri::unknown(missing);
      return holds_H(*xs, *ys) ? Tri::yes() : Tri::no();
    }
    case Formula::Kind::And: {
      Tri a = check_rec(f.lhs(), w);
      if (a.v == Tri::V::False) return a;
      Tri b = check_rec(f.rhs(), w);
      if (b.v == Tri::V::False) return b;
      if (a.v == Tri::V::Missing) return a;
      return b;
    }
    case Formula::Kind::Or: {
      Tri a = check_rec(f.lhs(), w);
      if (a.v == Tri::V::True) return a;
      Tri b = check_rec(f.rhs(), w);
      if (b.v == Tri::V::True) return b;
      if (a.v == Tri::V::Missing) return a;
      return b;
    }
    case Formula::Kind::Exists:
      // Witness semantics: the assignment itself supplies the bound values.
      return check_rec(f.exists_body(), w);
  }
  return Tri::no();
}

}  // namespace

bool check_witness(const Formula& f, const Assignment& w) {
  Tri t = deep_guarded<Tri>(f.depth(), [&] { return check_rec(f, w); });
  if (t.v == Tri::V::Missing)
    throw WitnessError("witness does not assign variable \"" + t.missing + "\"");
  return t.v == Tri::V::True;
}

Rational eval_term(const Term& t, const Assignment& w) {
  return deep_guarded<Rational>(t.depth(), [&]() -> Rational {
    std::string missing;
    auto v = eval_term_rec(t, w, missing);
    if (!v) throw WitnessError("term references unassigned variable \"" + missing + "\"");
    return *v;
  });
}

// ---------------------------------------------------------------------------
// Free variables

namespace {

void term_vars(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::Var:
      out.insert(t.var_name());
      return;
    case Term::Kind::Add:
    case Term::Kind::Mul:
      term_vars(t.lhs(), out);
      term_vars(t.rhs(), out);
      return;
    default:
      return;
  }
}

void free_vars_rec(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::Eq: {
      std::set<std::string> vs;
      term_vars(f.eq_lhs(), vs);
      term_vars(f.eq_rhs(), vs);
      for (auto& v : vs)
        if (!bound.count(v)) out.insert(v);
      return;
    }
    case Formula::Kind::H: {
      std::set<std::string> vs;
      for (const auto& t : f.h_xs()) term_vars(t, vs);
      for (const auto& t : f.h_ys()) term_vars(t, vs);
      for (auto& v : vs)
        if (!bound.count(v)) out.insert(v);
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
      free_vars_rec(f.lhs(), bound, out);
      free_vars_rec(f.rhs(), bound, out);
      return;
    case Formula::Kind::Exists: {
      std::vector<std::string> added;
      for (const auto& v : f.exists_vars())
        if (bound.insert(v).second) added.push_back(v);
      free_vars_rec(f.exists_body(), bound, out);
      for (const auto& v : added) bound.erase(v);
      return;
    }
  }
}

}  // namespace

std::set<std::string> free_vars(const Formula& f) {
  return deep_guarded<std::set<std::string>>(f.depth(), [&] {
    std::set<std::string> bound, out;
    free_vars_rec(f, bound, out);
    return out;
  });
}

// ---------------------------------------------------------------------------
// The P_M demo sentence

namespace {

Term term_pow(const Term& t, int e) {
  if (e < 1) throw Error("term_pow: exponent must be >= 1");
  if (e == 1) return t;
  Term half = term_pow(t, e / 2);
  Term sq = Term::mul(half, half);
  return e % 2 ? Term::mul(t, sq) : sq;
}

}  // namespace

Formula example_PM(int m) {
  if (m < 1) throw Error("example_PM: requires M >= 1");
  Term a = Term::var("a"), x1 = Term::var("x1"), x2 = Term::var("x2"), t = Term::var("t");
  // a^3 != a, positively: exists t with t*(a^3 - a) = 1.
  Formula apart = Formula::eq(Term::mul(t, term_pow(a, 3)),
                              Term::add(Term::one(), Term::mul(t, a)));
  Formula curve = Formula::eq(Term::mul(x2, x2), Term::add(term_pow(x1, 5), a));
  Formula height = Formula::h({term_pow(a, m)}, {x1, x2});
  return Formula::exists({"x1", "x2", "a", "t"}, and_all({apart, curve, height}));
}

}  // namespace heightinterp
