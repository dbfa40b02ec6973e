#include "foursquares_internal.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace heightinterp {

namespace detail {

Int isqrt(const Int& n) {
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

bool is_probab_prime(const Int& n) { return mpz_probab_prime_p(n.get_mpz_t(), 25) != 0; }

const Int& desk_limit() {
  static const Int v("1000000000000");  // 10^12
  return v;
}

namespace {

const Int& small_primorial() {
  static const Int p = [] {
    Int v;
    mpz_primorial_ui(v.get_mpz_t(), 100000);
    return v;
  }();
  return p;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t seed_of(const Int& n, unsigned salt) {
  std::uint64_t h = 0x8e51ecbbabcd1234ull ^ (std::uint64_t(salt) << 32);
  h = splitmix64(h ^ mpz_get_ui(n.get_mpz_t()));
  h = splitmix64(h ^ mpz_sizeinbase(n.get_mpz_t(), 2));
  return h;
}

/// Uniform-ish integer in [0, bound] from a seeded engine; deterministic.
Int rand_upto(std::mt19937_64& rng, const Int& bound) {
  if (bound <= 0) return 0;
  std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2) + 64;
  std::size_t words = (bits + 63) / 64;
  std::vector<std::uint64_t> buf(words);
  for (auto& w : buf) w = rng();
  Int r;
  mpz_import(r.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
  return r % (bound + 1);
}

Int with_parity(Int v, int parity) {
  if (static_cast<int>(mpz_odd_p(v.get_mpz_t())) != parity) {
    if (v > 0)
      v -= 1;
    else
      v += 1;
  }
  return v;
}

/// x^2 + y^2 = p for prime p == 1 (mod 4) (also handles p in {1, 2}), via a
/// square root of -1 and the Euclidean descent.
std::pair<Int, Int> two_squares_prime(const Int& p) {
  if (p == 1) return {Int(1), Int(0)};
  if (p == 2) return {Int(1), Int(1)};
  Int exp = (p - 1) / 4;
  Int u;
  for (unsigned long g = 2;; ++g) {
    Int base(g);
    mpz_powm(u.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), p.get_mpz_t());
    if (u * u % p == p - 1) break;
    if (g > 1000) throw Error("two_squares_prime: no sqrt(-1); input not prime?");
  }
  Int a = p, b = u;
  while (b * b > p) {
    Int r = a % b;
    a = b;
    b = r;
  }
  Int rest = p - b * b;
  Int y = isqrt(rest);
  if (y * y != rest) throw Error("two_squares_prime: descent failed; input not prime?");
  return {b, y};
}

/// Deterministic parallel search. A GenFn produces the cheap part of
/// candidate i (screening included); a TestFn runs the expensive primality
/// test. Workers pull candidate indices in order; the success with the
/// smallest index wins and every smaller index is fully tested first, so the
/// result is a function of (input, salt) alone.
template <typename GenFn, typename TestFn>
SplitFour parallel_hunt(const Int& m, unsigned salt, GenFn&& generate, TestFn&& test) {
  std::uint64_t seed = seed_of(m, salt);
  std::size_t bits = mpz_sizeinbase(m.get_mpz_t(), 2);
  unsigned hw = std::thread::hardware_concurrency();
  unsigned threads = bits < 2048 ? 1 : std::max(1u, std::min(hw == 0 ? 1u : hw, 8u));
  constexpr std::uint64_t kGiveUp = 50000000;

  if (threads == 1) {
    for (std::uint64_t i = 0; i < kGiveUp; ++i) {
      auto cand = generate(seed, i);
      if (!cand) continue;
      if (auto r = test(*cand)) return *r;
    }
    throw Error("parallel_hunt: no candidate found");
  }

  std::mutex gen_mu;
  std::uint64_t next_index = 0;
  std::mutex best_mu;
  std::uint64_t best_index = kGiveUp;
  std::optional<SplitFour> best;

  auto worker = [&] {
    for (;;) {
      std::uint64_t index;
      decltype(generate(seed, std::uint64_t{0})) cand;
      {
        std::lock_guard<std::mutex> lock(gen_mu);
        for (;;) {
          index = next_index++;
          if (index >= kGiveUp) return;
          {
            std::lock_guard<std::mutex> blocker(best_mu);
            if (index > best_index) return;
          }
          cand = generate(seed, index);
          if (cand) break;
        }
      }
      if (auto r = test(*cand)) {
        std::lock_guard<std::mutex> lock(best_mu);
        if (index < best_index) {
          best_index = index;
          best = *r;
        }
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (!best) throw Error("parallel_hunt: no candidate found");
  return *best;
}

}  // namespace

namespace {

struct HuntCandidate {
  Int x, y, p;
};

/// gcd screen against the small-prime primorial; cheap relative to a
/// Miller-Rabin round at these sizes.
bool survives_screen(const Int& p) {
  if (p <= 100000) return is_probab_prime(p);
  Int g;
  mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), small_primorial().get_mpz_t());
  return g == 1;
}

}  // namespace

SplitFour hunt_split(const Int& m, unsigned salt) {
  if (m <= 0 || mpz_fdiv_ui(m.get_mpz_t(), 4) == 0)
    throw Error("hunt_split: requires m > 0 with m % 4 != 0");
  int mod4 = static_cast<int>(mpz_fdiv_ui(m.get_mpz_t(), 4));
  Int bound = isqrt(m / 3);

  auto generate = [&](std::uint64_t seed, std::uint64_t index) -> std::optional<HuntCandidate> {
    std::mt19937_64 engine(splitmix64(seed ^ (index * 0x9e3779b97f4a7c15ull)));
    Int x, y;
    switch (mod4) {
      case 1:  // x, y even -> p == 1 (mod 4)
        x = with_parity(rand_upto(engine, bound), 0);
        y = with_parity(rand_upto(engine, bound), 0);
        break;
      case 3:  // x, y odd
        x = with_parity(rand_upto(engine, bound), 1);
        y = with_parity(rand_upto(engine, bound), 1);
        break;
      default:  // m == 2 (mod 4): x odd, y even
        x = with_parity(rand_upto(engine, bound), 1);
        y = with_parity(rand_upto(engine, bound), 0);
        break;
    }
    Int p = m - x * x - y * y;
    if (p < 1) return std::nullopt;
    if (p != 1 && (mpz_fdiv_ui(p.get_mpz_t(), 4) != 1 || !survives_screen(p)))
      return std::nullopt;
    return HuntCandidate{std::move(x), std::move(y), std::move(p)};
  };
  auto test = [&](const HuntCandidate& c) -> std::optional<SplitFour> {
    if (c.p != 1 && !is_probab_prime(c.p)) return std::nullopt;
    auto [s, t] = two_squares_prime(c.p);
    return SplitFour{c.x, c.y, s, t};
  };
  return parallel_hunt(m, salt, generate, test);
}

SplitFour hunt_split_even(const Int& m, unsigned salt) {
  if (mpz_fdiv_ui(m.get_mpz_t(), 4) != 2) throw Error("hunt_split_even: requires m == 2 (mod 4)");
  Int bound = isqrt(m / 6);
  // p = m - 2x^2 - 2y^2 with x, y of equal parity stays == 2 (mod 4); the
  // parity class that makes p/2 == 1 (mod 4) depends on m mod 8.
  int parity = static_cast<int>(mpz_fdiv_ui(m.get_mpz_t(), 8)) == 2 ? 0 : 1;

  auto generate = [&](std::uint64_t seed, std::uint64_t index) -> std::optional<HuntCandidate> {
    std::mt19937_64 engine(splitmix64(seed ^ (index * 0x9e3779b97f4a7c15ull)));
    Int x = with_parity(rand_upto(engine, bound), parity);
    Int y = with_parity(rand_upto(engine, bound), parity);
    Int p = m - 2 * x * x - 2 * y * y;
    if (p < 2) return std::nullopt;
    Int half = p / 2;
    if (half != 1 && (mpz_fdiv_ui(half.get_mpz_t(), 4) != 1 || !survives_screen(half)))
      return std::nullopt;
    return HuntCandidate{std::move(x), std::move(y), std::move(half)};
  };
  auto test = [&](const HuntCandidate& c) -> std::optional<SplitFour> {
    if (c.p != 1 && !is_probab_prime(c.p)) return std::nullopt;
    auto [a, b] = two_squares_prime(c.p);
    Int s = a + b;
    Int t = a > b ? a - b : b - a;
    return SplitFour{c.x, c.y, s, t};  // m = 2x^2 + 2y^2 + s^2 + t^2
  };
  return parallel_hunt(m, salt, generate, test);
}

namespace {

/// Lexicographically largest (k1 >= k2 >= k3 >= k4) with backtracking.
/// The remainder after the leading square is O(sqrt(n)), so the inner loops
/// stay small.
std::array<Int, 4> four_squares_desk(const Int& n) {
  if (n == 0) return {Int(0), Int(0), Int(0), Int(0)};
  auto bad_three = [](Int m) {  // not a sum of three squares iff 4^a(8b+7)
    if (m == 0) return false;
    while (m % 4 == 0) m /= 4;
    return m % 8 == 7;
  };
  for (Int k1 = isqrt(n); k1 >= 0; k1 -= 1) {
    Int r1 = n - k1 * k1;
    if (r1 > 3 * k1 * k1) break;
    if (bad_three(r1)) continue;
    Int top2 = isqrt(r1);
    if (top2 > k1) top2 = k1;
    for (Int k2 = top2; k2 >= 0; k2 -= 1) {
      Int r2 = r1 - k2 * k2;
      if (r2 > 2 * k2 * k2) break;
      Int top3 = isqrt(r2);
      if (top3 > k2) top3 = k2;
      for (Int k3 = top3; k3 >= 0; k3 -= 1) {
        Int r3 = r2 - k3 * k3;
        if (r3 > k3 * k3) break;
        Int k4 = isqrt(r3);
        if (k4 * k4 == r3) return {k1, k2, k3, k4};
      }
    }
  }
  throw Error("four_squares_desk: search failed");
}

}  // namespace

std::array<Int, 4> four_squares_seeded(const Int& n, unsigned salt) {
  if (n < 0) throw Error("four_squares: requires n >= 0");
  if (n <= desk_limit()) return four_squares_desk(n);
  Int m = n;
  Int scale = 1;
  while (mpz_fdiv_ui(m.get_mpz_t(), 4) == 0) {
    m /= 4;
    scale *= 2;
  }
  std::array<Int, 4> ks;
  if (m <= desk_limit()) {
    ks = four_squares_desk(m);
  } else {
    SplitFour s = hunt_split(m, salt);
    ks = {s.x, s.y, s.s, s.t};
  }
  for (auto& k : ks) k *= scale;
  std::sort(ks.begin(), ks.end(), [](const Int& a, const Int& b) { return a > b; });
  return ks;
}

std::array<Int, 4> euler_product(const std::array<Int, 4>& a, const std::array<Int, 4>& b) {
  std::array<Int, 4> c;
  c[0] = a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
  c[1] = a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2];
  c[2] = a[0] * b[2] - a[1] * b[3] - a[2] * b[0] + a[3] * b[1];
  c[3] = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] - a[3] * b[0];
  for (auto& v : c) v = abs(v);
  return c;
}

}  // namespace detail

std::array<Int, 4> four_squares(const Int& n) { return detail::four_squares_seeded(n, 0); }

std::array<Rational, 4> rational_four_squares(const Rational& q) {
  if (q.sign() < 0) throw Error("rational_four_squares: requires q >= 0");
  Int a = q.numerator();
  Int b = q.denominator();
  std::array<Int, 4> ks;
  if (a * b <= detail::desk_limit()) {
    ks = four_squares(a * b);
  } else {
    ks = detail::euler_product(four_squares(a), four_squares(b));
  }
  std::array<Rational, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = Rational(ks[i], b);
  return out;
}

}  // namespace heightinterp
