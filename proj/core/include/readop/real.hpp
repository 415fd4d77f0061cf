#pragma once

// High-precision reals (MPFR) and log2-anchored nonnegative magnitudes.

#include "readop/numeric.hpp"

#include <mpfr.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace readop {

inline constexpr int kDefaultPrecisionBits = 200;

/// Owning MPFR value with an explicit bit precision. Binary operations produce
/// the larger of the operand precisions; results are rounded to nearest.
class Real {
 public:
  explicit Real(mpfr_prec_t precision = kDefaultPrecisionBits);
  Real(const Real& other);
  Real(Real&& other) noexcept;
  Real& operator=(const Real& other);
  Real& operator=(Real&& other) noexcept;
  ~Real();

  static Real from_long(long v, mpfr_prec_t precision);
  static Real from_double(double v, mpfr_prec_t precision);
  static Real from_int(const Int& v, mpfr_prec_t precision);
  static Real from_rational(const Rational& v, mpfr_prec_t precision);
  /// 2^k exactly.
  static Real pow2(long k, mpfr_prec_t precision);

  mpfr_prec_t precision() const { return mpfr_get_prec(value_); }
  /// Copy rounded to a new precision.
  Real with_precision(mpfr_prec_t precision) const;

  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  bool is_finite() const { return mpfr_number_p(value_) != 0; }
  int sign() const { return mpfr_sgn(value_); }
  /// Binary exponent e with 0.5 <= |x| / 2^e < 1; meaningless for zero.
  long exponent() const { return mpfr_get_exp(value_); }

  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  /// Scientific notation with `digits` significant decimal digits.
  std::string to_string(int digits = 20) const;

  Real& operator+=(const Real& o);
  Real& operator-=(const Real& o);
  Real& operator*=(const Real& o);
  Real& operator/=(const Real& o);

  friend Real operator+(Real a, const Real& b) { return a += b; }
  friend Real operator-(Real a, const Real& b) { return a -= b; }
  friend Real operator*(Real a, const Real& b) { return a *= b; }
  friend Real operator/(Real a, const Real& b) { return a /= b; }
  friend Real operator-(Real a);

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b);

  mpfr_ptr get() { return value_; }
  mpfr_srcptr get() const { return value_; }

 private:
  mpfr_t value_;
};

Real abs(Real x);
Real exp2(const Real& x);
Real log2(const Real& x);
Real floor(const Real& x);
Real ceil(const Real& x);
/// Nearest integer as Int; x must be finite.
Int to_int(const Real& x);

/// Nonnegative value stored as log2. Representable far outside the linear MPFR
/// exponent range, e.g. 2^(-2^40).
class Magnitude {
 public:
  Magnitude() = default;  // zero

  static Magnitude zero() { return Magnitude(); }
  static Magnitude one(mpfr_prec_t precision = kDefaultPrecisionBits);
  static Magnitude from_log2(Real log2_value);
  /// |x|; zero stays zero.
  static Magnitude from_real(const Real& x);

  bool is_zero() const { return !log2_.has_value(); }
  /// log2 of the value; precondition !is_zero().
  const Real& log2() const;

  /// Linear value when it fits the MPFR exponent range.
  std::optional<Real> to_real(mpfr_prec_t precision) const;
  /// Nearest double; 0 or inf outside the double range.
  double approx() const;
  /// `0` or `2^(<log2>) (~<decimal>)`.
  std::string to_string(int digits = 20) const;

  friend Magnitude operator*(const Magnitude& a, const Magnitude& b);
  friend Magnitude operator/(const Magnitude& a, const Magnitude& b);
  /// Log-sum-exp with guard bits; terms below the working precision are dropped.
  friend Magnitude operator+(const Magnitude& a, const Magnitude& b);
  Magnitude& operator+=(const Magnitude& o) { return *this = *this + o; }
  friend std::partial_ordering operator<=>(const Magnitude& a, const Magnitude& b);
  friend bool operator==(const Magnitude& a, const Magnitude& b) { return (a <=> b) == 0; }

  /// |a - b|, computed in the log domain when both are nonzero.
  friend Magnitude abs_difference(const Magnitude& a, const Magnitude& b);

 private:
  std::optional<Real> log2_;
};

/// Precision large enough to hold `magnitude_bits` integer bits plus `fraction_bits`.
mpfr_prec_t precision_for(std::uint64_t magnitude_bits, int fraction_bits);

}  // namespace readop
