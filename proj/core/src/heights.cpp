#include "heightinterp/heights.hpp"

#include <mpfr.h>

#include <map>
#include <utility>

namespace heightinterp {

Rational::Rational(const Int& num, const Int& den) {
  if (sgn(den) == 0) throw Error("Rational: zero denominator");
  v_ = mpq_class(num, den);
  v_.canonicalize();
}

Rational Rational::from_string(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(Int(text));
    Int num(text.substr(0, slash));
    Int den(text.substr(slash + 1));
    return Rational(num, den);
  } catch (const std::invalid_argument&) {
    throw Error("Rational: malformed text \"" + text + "\"");
  }
}

std::string Rational::str() const {
  if (v_.get_den() == 1) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero()) throw Error("Rational: division by zero");
  return Rational(mpq_class(a.v_ / b.v_));
}

Rational make_rational(const Int& a, const Int& b) { return Rational(a, b); }

MultHeight mult_height(const Rational& q) {
  Int n = abs(q.numerator());
  Int d = q.denominator();
  return {n >= d ? n : d};
}

MultHeight mult_height(const std::vector<Rational>& q) {
  if (q.empty()) throw Error("mult_height: empty tuple");
  Int d = 1;
  for (const auto& x : q) mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), x.denominator().get_mpz_t());
  Int best = d;
  for (const auto& x : q) {
    // d*x is an integer since den(x) | d.
    Int t = abs(x.numerator() * (d / x.denominator()));
    if (t > best) best = t;
  }
  return {best};
}

bool holds_H(const std::vector<Rational>& x, const std::vector<Rational>& y) {
  return mult_height(x) <= mult_height(y);
}

bool holds_E(const std::vector<Rational>& x, const std::vector<Rational>& y) {
  return mult_height(x) == mult_height(y);
}

bool holds_S(const Rational& x, const Rational& y, const Rational& z) {
  return mult_height(x).value * mult_height(y).value == mult_height(z).value;
}

namespace {

bool is_probab_prime(const Int& n) { return mpz_probab_prime_p(n.get_mpz_t(), 30) != 0; }

Int pollard_rho(const Int& n) {
  // Brent's cycle-finding with deterministic constant sweep; n odd composite.
  for (unsigned long c = 1;; ++c) {
    Int x = 2, y = 2, d = 1;
    Int diff, prod = 1;
    int batch = 0;
    while (d == 1) {
      x = (x * x + c) % n;
      y = (y * y + c) % n;
      y = (y * y + c) % n;
      diff = x > y ? x - y : y - x;
      if (diff == 0) break;
      prod = prod * diff % n;
      if (++batch == 64) {
        mpz_gcd(d.get_mpz_t(), prod.get_mpz_t(), n.get_mpz_t());
        batch = 0;
        prod = 1;
      }
    }
    if (batch > 0 && d == 1) mpz_gcd(d.get_mpz_t(), prod.get_mpz_t(), n.get_mpz_t());
    if (d != 1 && d != n) return d;
  }
}

void factorize(Int n, std::map<Int, unsigned long>& out) {
  if (n < 0) n = -n;
  if (n <= 1) return;
  for (unsigned long p = 2; p < 100000 && Int(p) * p <= n; p == 2 ? p = 3 : p += 2) {
    while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
      ++out[Int(p)];
      n /= p;
    }
  }
  if (n == 1) return;
  if (is_probab_prime(n)) {
    ++out[n];
    return;
  }
  Int d = pollard_rho(n);
  factorize(d, out);
  factorize(n / d, out);
}

}  // namespace

bool product_formula_check(const Rational& q) {
  if (q.is_zero()) throw Error("product_formula_check: q must be nonzero");
  std::map<Int, unsigned long> num_f, den_f;
  factorize(q.numerator(), num_f);
  factorize(q.denominator(), den_f);

  // prod_v |q|_v = |q|_infty * prod_p p^{-v_p(q)}, assembled exactly.
  Rational prod(abs(q.numerator()), q.denominator());
  auto apply = [&prod](const std::map<Int, unsigned long>& f, bool numerator_side) {
    for (const auto& [p, e] : f) {
      Int pe;
      mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), e);
      // |q|_p contributes p^{-e} for numerator primes, p^{+e} for denominator primes.
      prod = numerator_side ? prod / Rational(pe) : prod * Rational(pe);
    }
  };
  apply(num_f, true);
  apply(den_f, false);
  return prod == Rational(1);
}

CertifiedReal CertifiedReal::scaled(const Rational& c) const {
  if (c.sign() < 0) throw Error("CertifiedReal::scaled: negative factor");
  return {lo * c, hi * c};
}

CertifiedReal CertifiedReal::intersect(const CertifiedReal& o) const {
  CertifiedReal r{lo >= o.lo ? lo : o.lo, hi <= o.hi ? hi : o.hi};
  if (r.lo > r.hi) throw Error("CertifiedReal::intersect: disjoint intervals");
  return r;
}

Rational CertifiedReal::abs_upper() const {
  Rational a = abs(lo), b = abs(hi);
  return a >= b ? a : b;
}

namespace {

Rational rational_of_mpfr(mpfr_srcptr x) {
  if (mpfr_zero_p(x)) return Rational(0);
  Int z;
  mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), x);
  if (e >= 0) {
    Int scaled = z << static_cast<unsigned long>(e);
    return Rational(scaled);
  }
  Int den = Int(1) << static_cast<unsigned long>(-e);
  return Rational(z, den);
}

CertifiedReal log_interval_prec(const Int& n, mpfr_prec_t prec) {
  mpfr_t x, r;
  mpfr_init2(x, prec);
  mpfr_init2(r, prec);

  mpfr_set_z(x, n.get_mpz_t(), MPFR_RNDD);
  mpfr_log(r, x, MPFR_RNDD);
  Rational lo = rational_of_mpfr(r);

  mpfr_set_z(x, n.get_mpz_t(), MPFR_RNDU);
  mpfr_log(r, x, MPFR_RNDU);
  Rational hi = rational_of_mpfr(r);

  mpfr_clear(x);
  mpfr_clear(r);
  return {lo, hi};
}

}  // namespace

CertifiedReal log_interval(const Int& n, const Rational& eps) {
  if (n < 1) throw Error("log_interval: requires n >= 1");
  if (eps.sign() <= 0) throw Error("log_interval: requires eps > 0");
  if (n == 1) return CertifiedReal::point(Rational(0));
  for (mpfr_prec_t prec = 64;; prec *= 2) {
    CertifiedReal r = log_interval_prec(n, prec);
    if (r.width() <= eps) return r;
    if (prec > 1 << 24) throw PrecisionError("log_interval: precision exhausted");
  }
}

CertifiedReal log_height(const MultHeight& h, const Rational& eps) {
  return log_interval(h.value, eps);
}

bool certified_log_le(const Int& a, const Int& b, const Rational& c) {
  if (a < 1 || b < 1) throw Error("certified_log_le: requires positive integers");
  if (c.is_zero()) return a <= b;
  if (a == b) return Rational(0) <= c;
  for (mpfr_prec_t prec = 64;; prec *= 2) {
    CertifiedReal diff = log_interval_prec(a, prec) - log_interval_prec(b, prec);
    if (diff.surely_le(c)) return true;
    if (diff.surely_gt(c)) return false;
    // log(a/b) = c is impossible for a != b and rational c != 0, so refinement
    // terminates.
    if (prec > 1 << 24) throw PrecisionError("certified_log_le: precision exhausted");
  }
}

std::size_t hash_value(const Rational& q) {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](const Int& z) {
    std::size_t limb_hash = mpz_get_ui(z.get_mpz_t());
    limb_hash ^= static_cast<std::size_t>(mpz_sizeinbase(z.get_mpz_t(), 2)) << 32;
    limb_hash ^= static_cast<std::size_t>(sgn(z) + 1) << 62;
    h = (h ^ limb_hash) * 1099511628211ull;
  };
  mix(q.numerator());
  mix(q.denominator());
  return h;
}

}  // namespace heightinterp
