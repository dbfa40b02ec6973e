#include "heightinterp/curve.hpp"

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace heightinterp {

namespace {
const Rational kCurveB(2);
}

Point Point::affine(Rational x, Rational y) { return Point(std::move(x), std::move(y)); }

const Rational& Point::x() const {
  if (infinite_) throw Error("Point: no x-coordinate at infinity");
  return x_;
}

const Rational& Point::y() const {
  if (infinite_) throw Error("Point: no y-coordinate at infinity");
  return y_;
}

Point Point::negated() const {
  if (infinite_) return *this;
  return Point(x_, -y_);
}

std::string Point::str() const {
  if (infinite_) return "inf";
  return "(" + x_.str() + ", " + y_.str() + ")";
}

Point Point::from_string(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!isspace(static_cast<unsigned char>(c))) s += c;
  if (s == "inf") return infinity();
  if (s.size() < 5 || s.front() != '(' || s.back() != ')')
    throw Error("Point: malformed text \"" + text + "\"");
  auto comma = s.find(',');
  if (comma == std::string::npos) throw Error("Point: malformed text \"" + text + "\"");
  return affine(Rational::from_string(s.substr(1, comma - 1)),
                Rational::from_string(s.substr(comma + 1, s.size() - comma - 2)));
}

bool operator==(const Point& p, const Point& q) {
  if (p.infinite_ || q.infinite_) return p.infinite_ == q.infinite_;
  return p.x_ == q.x_ && p.y_ == q.y_;
}

const CurveConstants& CurveConstants::get() {
  static const CurveConstants c;
  return c;
}

bool on_curve(const Point& p) {
  if (p.is_infinity()) return true;
  return p.y() * p.y() == p.x() * p.x() * p.x() + kCurveB;
}

namespace {

Point double_point(const Point& p) {
  const Rational& x = p.x();
  const Rational& y = p.y();
  // y = 0 would need x^3 = -2, which has no rational solution.
  if (y.is_zero()) throw Error("add: unexpected 2-torsion point");
  Rational lambda = (Rational(3) * x * x) / (Rational(2) * y);
  Rational x3 = lambda * lambda - x - x;
  Rational y3 = lambda * (x - x3) - y;
  return Point::affine(std::move(x3), std::move(y3));
}

}  // namespace

Point add(const Point& p, const Point& q) {
  if (!on_curve(p) || !on_curve(q)) throw Error("add: input point not on curve");
  if (p.is_infinity()) return q;
  if (q.is_infinity()) return p;
  if (p.x() == q.x()) {
    if (p.y() == -q.y()) return Point::infinity();
    return double_point(p);
  }
  Rational lambda = (q.y() - p.y()) / (q.x() - p.x());
  Rational x3 = lambda * lambda - p.x() - q.x();
  Rational y3 = lambda * (p.x() - x3) - p.y();
  return Point::affine(std::move(x3), std::move(y3));
}

Point scalar_mul(const Int& n, const Point& p) {
  if (!on_curve(p)) throw Error("scalar_mul: input point not on curve");
  if (sgn(n) == 0 || p.is_infinity()) return Point::infinity();
  Int m = abs(n);
  Point acc = p;
  for (long i = static_cast<long>(mpz_sizeinbase(m.get_mpz_t(), 2)) - 2; i >= 0; --i) {
    acc = double_point(acc);
    if (mpz_tstbit(m.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = add(acc, p);
  }
  return sgn(n) < 0 ? acc.negated() : acc;
}

Rational pi(const Point& p) {
  if (p.is_infinity()) throw Error("pi: undefined at infinity");
  return p.x();
}

MultHeight naive_height(const Point& p) {
  if (p.is_infinity()) return {Int(1)};
  return mult_height(p.x());
}

Point generator() { return Point::affine(Rational(-1), Rational(1)); }

namespace {

std::mutex g_chain_mutex;
std::vector<Point> g_p1_doublings;  // g_p1_doublings[j] = [2^j] P1

// Returns [2^j]P1 for all j <= k, extending the shared chain as needed.
std::vector<Point> p1_doublings(int k) {
  std::lock_guard<std::mutex> lock(g_chain_mutex);
  if (g_p1_doublings.empty()) g_p1_doublings.push_back(generator());
  while (static_cast<int>(g_p1_doublings.size()) <= k)
    g_p1_doublings.push_back(double_point(g_p1_doublings.back()));
  return {g_p1_doublings.begin(), g_p1_doublings.begin() + k + 1};
}

}  // namespace

CertifiedReal canonical_height(const Point& p, int k) {
  if (k < 0) throw Error("canonical_height: requires k >= 0");
  if (!on_curve(p)) throw Error("canonical_height: input point not on curve");
  if (p.is_infinity()) return CertifiedReal::point(Rational(0));

  const Rational c_e = CurveConstants::get().c_E;
  const Rational log_eps(1, 1 << 20);

  std::vector<Point> chain;
  if (p == generator()) {
    chain = p1_doublings(k);
  } else {
    chain.reserve(k + 1);
    chain.push_back(p);
    for (int j = 1; j <= k; ++j) chain.push_back(double_point(chain.back()));
  }

  CertifiedReal lh0 = log_height(naive_height(chain[0]), log_eps);
  CertifiedReal result{lh0.lo - c_e, lh0.hi + c_e};
  Rational pow4(4);
  for (int j = 1; j <= k; ++j) {
    CertifiedReal lh = log_height(naive_height(chain[j]), log_eps);
    result = result.intersect({(lh.lo - c_e) / pow4, (lh.hi + c_e) / pow4});
    pow4 *= Rational(4);
  }
  return result;
}

namespace {

std::mutex g_gamma_mutex;
std::map<std::pair<Int, long>, Point> g_gamma_cache;

}  // namespace

Point gamma_point(long k, const Int& multiplier) {
  if (multiplier < 1) throw Error("gamma_point: requires multiplier >= 1");
  if (k == 0) return Point::infinity();
  long a = k < 0 ? -k : k;
  {
    std::lock_guard<std::mutex> lock(g_gamma_mutex);
    auto it = g_gamma_cache.find({multiplier, a});
    if (it != g_gamma_cache.end()) return k < 0 ? it->second.negated() : it->second;
  }
  Point q = scalar_mul(multiplier * Int(a), generator());
  {
    std::lock_guard<std::mutex> lock(g_gamma_mutex);
    g_gamma_cache.emplace(std::make_pair(multiplier, a), q);
  }
  return k < 0 ? q.negated() : q;
}

}  // namespace heightinterp
