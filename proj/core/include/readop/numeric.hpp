#pragma once

// Exact integer and rational helpers on top of GMP.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace readop {

using Int = mpz_class;
using Rational = mpq_class;

/// Number of significant bits; 0 for zero.
std::uint64_t bit_length(const Int& x);

Int pow2(std::uint64_t k);

bool is_power_of_two(const Int& x);

/// Exponent of the largest power of two dividing a nonzero x.
std::uint64_t two_adic_valuation(const Int& x);

/// sqrt(x) when x is a perfect square.
std::optional<Int> exact_sqrt(const Int& x);

/// num/den in lowest terms; avoids a general gcd when den is a power of two.
Rational make_ratio(const Int& num, const Int& den);

Int floor_of(const Rational& x);

/// x - floor(x), in [0, 1).
Rational fractional_part(const Rational& x);

/// Fits in a signed 64-bit value.
bool fits_long(const Int& x);

/// Exact, compact rendering. Small values print in decimal; large values with
/// few set-bit clusters print as `c*2^k+...+d` (exact); `-` prefixes negatives.
std::string format_int(const Int& x);

/// Inverse of format_int; also accepts `2^k` and plain decimal.
Int parse_int(std::string_view text);

/// `p` or `p/q` with each side in format_int notation.
std::string format_rational(const Rational& x);
Rational parse_rational(std::string_view text);

/// Short human summary for very large integers, e.g. `~2^13509613.35 [13509614 bits]`.
std::string summarize_int(const Int& x);

}  // namespace readop
