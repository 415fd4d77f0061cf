#pragma once

// Exact scalars of the form q * 2^t (q, t rational) and finite sums of them.

#include "readop/numeric.hpp"
#include "readop/real.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace readop {

/// q * 2^t in canonical form: numerator and denominator of q are odd (powers of
/// two live in t), and zero is (0, 0).
class DyadicScalar {
 public:
  DyadicScalar() = default;
  DyadicScalar(Rational q, Rational t = 0);  // NOLINT(google-explicit-constructor)
  DyadicScalar(long q) : DyadicScalar(Rational(q)) {}  // NOLINT(google-explicit-constructor)

  static DyadicScalar pow2(Rational t) { return DyadicScalar(Rational(1), std::move(t)); }

  const Rational& mantissa() const { return q_; }
  const Rational& exponent() const { return t_; }
  bool is_zero() const { return sgn(q_) == 0; }
  int sign() const { return sgn(q_); }
  /// t is an integer, so the value is rational.
  bool is_rational() const { return t_.get_den() == 1; }
  /// Exact rational value; requires is_rational() and a moderate exponent.
  Rational to_rational() const;

  DyadicScalar abs() const { return DyadicScalar(readop_abs(q_), t_); }
  DyadicScalar inverse() const;

  friend DyadicScalar operator*(const DyadicScalar& a, const DyadicScalar& b);
  friend DyadicScalar operator/(const DyadicScalar& a, const DyadicScalar& b) { return a * b.inverse(); }
  friend DyadicScalar operator-(const DyadicScalar& a);
  friend bool operator==(const DyadicScalar& a, const DyadicScalar& b) {
    return a.q_ == b.q_ && a.t_ == b.t_;
  }

  /// log2|x| at `precision_bits` fractional bits.
  Magnitude magnitude(int precision_bits = kDefaultPrecisionBits) const;
  /// Signed linear value; throws std::overflow_error outside the MPFR range.
  Real to_real(int precision_bits = kDefaultPrecisionBits) const;

  /// `q * 2^(t)`.
  std::string to_string() const;
  static DyadicScalar parse(std::string_view text);

 private:
  static Rational readop_abs(const Rational& r) { return sgn(r) < 0 ? Rational(-r) : r; }
  void canonicalize();

  Rational q_{0};
  Rational t_{0};
};

/// Normalized finite sum of dyadic monomials: at most one term per class of
/// t mod 1, no zero terms, terms ordered by that class. The empty sum is 0.
class ScalarSum {
 public:
  ScalarSum() = default;
  ScalarSum(DyadicScalar x);  // NOLINT(google-explicit-constructor)
  ScalarSum(const Rational& q) : ScalarSum(DyadicScalar(q)) {}  // NOLINT(google-explicit-constructor)
  ScalarSum(long q) : ScalarSum(DyadicScalar(q)) {}  // NOLINT(google-explicit-constructor)

  std::span<const DyadicScalar> terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::optional<DyadicScalar> as_monomial() const;

  ScalarSum& operator+=(const DyadicScalar& x);
  ScalarSum& operator+=(const ScalarSum& x);
  ScalarSum& operator-=(const ScalarSum& x);
  ScalarSum& operator*=(const DyadicScalar& x);

  friend ScalarSum operator+(ScalarSum a, const ScalarSum& b) { return a += b; }
  friend ScalarSum operator-(ScalarSum a, const ScalarSum& b) { return a -= b; }
  friend ScalarSum operator-(const ScalarSum& a);
  friend ScalarSum operator*(ScalarSum a, const DyadicScalar& b) { return a *= b; }
  friend ScalarSum operator*(const DyadicScalar& b, ScalarSum a) { return a *= b; }
  friend ScalarSum operator*(const ScalarSum& a, const ScalarSum& b);
  friend bool operator==(const ScalarSum& a, const ScalarSum& b) { return a.terms_ == b.terms_; }

  /// |x| with relative error at most 2^(-precision_bits + ceil(log2 #terms) + 2).
  Magnitude magnitude(int precision_bits = kDefaultPrecisionBits) const;
  Real to_real(int precision_bits = kDefaultPrecisionBits) const;

  /// Terms joined by ` + `; `0` for the empty sum.
  std::string to_string() const;
  static ScalarSum parse(std::string_view text);

 private:
  std::vector<DyadicScalar> terms_;
};

}  // namespace readop
