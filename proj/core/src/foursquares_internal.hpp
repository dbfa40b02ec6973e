#pragma once

#include "heightinterp/gadgets.hpp"

namespace heightinterp::detail {

Int isqrt(const Int& n);
bool is_probab_prime(const Int& n);

/// x^2 + y^2 + s^2 + t^2 = m with (s,t) splitting a prime (or 1). Requires
/// m > 0, m % 4 != 0. For odd m the pair (x,y) has equal parity. Deterministic
/// in (m, salt).
struct SplitFour {
  Int x, y, s, t;
};
SplitFour hunt_split(const Int& m, unsigned salt);

/// m = 2x^2 + 2y^2 + s^2 + t^2 with s^2 + t^2 = 2 * prime (or 2); requires
/// m == 2 (mod 4). Deterministic in (m, salt).
SplitFour hunt_split_even(const Int& m, unsigned salt);

/// Upper bound for the exhaustive lexicographic tier.
const Int& desk_limit();

}  // namespace heightinterp::detail
