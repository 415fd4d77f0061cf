#include "readop/real.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace readop {

namespace {

void ensure_exponent_range() {
  thread_local bool done = false;
  if (!done) {
    mpfr_set_emin(mpfr_get_emin_min());
    mpfr_set_emax(mpfr_get_emax_max());
    done = true;
  }
}

mpfr_prec_t clamp_precision(mpfr_prec_t p) {
  return std::clamp<mpfr_prec_t>(p, MPFR_PREC_MIN, MPFR_PREC_MAX);
}

}  // namespace

Real::Real(mpfr_prec_t precision) {
  ensure_exponent_range();
  mpfr_init2(value_, clamp_precision(precision));
  mpfr_set_zero(value_, 1);
}

Real::Real(const Real& other) {
  mpfr_init2(value_, other.precision());
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_swap(value_, other.value_);
}

Real& Real::operator=(const Real& other) {
  if (this != &other) {
    mpfr_set_prec(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  mpfr_swap(value_, other.value_);
  return *this;
}

Real::~Real() { mpfr_clear(value_); }

Real Real::from_long(long v, mpfr_prec_t precision) {
  Real r(precision);
  mpfr_set_si(r.value_, v, MPFR_RNDN);
  return r;
}

Real Real::from_double(double v, mpfr_prec_t precision) {
  Real r(precision);
  mpfr_set_d(r.value_, v, MPFR_RNDN);
  return r;
}

Real Real::from_int(const Int& v, mpfr_prec_t precision) {
  Real r(precision);
  mpfr_set_z(r.value_, v.get_mpz_t(), MPFR_RNDN);
  return r;
}

Real Real::from_rational(const Rational& v, mpfr_prec_t precision) {
  Real r(precision);
  mpfr_set_q(r.value_, v.get_mpq_t(), MPFR_RNDN);
  return r;
}

Real Real::pow2(long k, mpfr_prec_t precision) {
  Real r(precision);
  mpfr_set_ui_2exp(r.value_, 1, k, MPFR_RNDN);
  return r;
}

Real Real::with_precision(mpfr_prec_t precision) const {
  Real r(precision);
  mpfr_set(r.value_, value_, MPFR_RNDN);
  return r;
}

std::string Real::to_string(int digits) const {
  if (mpfr_nan_p(value_)) return "nan";
  if (mpfr_inf_p(value_)) return sign() > 0 ? "inf" : "-inf";
  char* buf = nullptr;
  const std::string fmt = "%." + std::to_string(std::max(1, digits - 1)) + "Re";
  mpfr_asprintf(&buf, fmt.c_str(), value_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

namespace {

template <typename Op>
void binary_in_place(mpfr_ptr self, mpfr_srcptr other, Op op) {
  const auto target = std::max(mpfr_get_prec(self), mpfr_get_prec(other));
  if (target > mpfr_get_prec(self)) mpfr_prec_round(self, target, MPFR_RNDN);
  op(self, self, other, MPFR_RNDN);
}

}  // namespace

Real& Real::operator+=(const Real& o) {
  binary_in_place(value_, o.value_, mpfr_add);
  return *this;
}
Real& Real::operator-=(const Real& o) {
  binary_in_place(value_, o.value_, mpfr_sub);
  return *this;
}
Real& Real::operator*=(const Real& o) {
  binary_in_place(value_, o.value_, mpfr_mul);
  return *this;
}
Real& Real::operator/=(const Real& o) {
  binary_in_place(value_, o.value_, mpfr_div);
  return *this;
}

Real operator-(Real a) {
  mpfr_neg(a.value_, a.value_, MPFR_RNDN);
  return a;
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
  if (mpfr_unordered_p(a.value_, b.value_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.value_, b.value_);
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

Real abs(Real x) {
  mpfr_abs(x.get(), x.get(), MPFR_RNDN);
  return x;
}

Real exp2(const Real& x) {
  Real r(x.precision());
  mpfr_exp2(r.get(), x.get(), MPFR_RNDN);
  return r;
}

Real log2(const Real& x) {
  Real r(x.precision());
  mpfr_log2(r.get(), x.get(), MPFR_RNDN);
  return r;
}

Real floor(const Real& x) {
  Real r(x.precision());
  mpfr_floor(r.get(), x.get());
  return r;
}

Real ceil(const Real& x) {
  Real r(x.precision());
  mpfr_ceil(r.get(), x.get());
  return r;
}

Int to_int(const Real& x) {
  if (!x.is_finite()) throw std::domain_error("to_int of non-finite value");
  Int z;
  mpfr_get_z(z.get_mpz_t(), x.get(), MPFR_RNDN);
  return z;
}

mpfr_prec_t precision_for(std::uint64_t magnitude_bits, int fraction_bits) {
  return clamp_precision(static_cast<mpfr_prec_t>(magnitude_bits) + fraction_bits + 8);
}

// ---------------------------------------------------------------------------
// Magnitude

Magnitude Magnitude::one(mpfr_prec_t precision) { return from_log2(Real(precision)); }

Magnitude Magnitude::from_log2(Real log2_value) {
  if (!log2_value.is_finite()) throw std::domain_error("Magnitude: non-finite log2");
  Magnitude m;
  m.log2_ = std::move(log2_value);
  return m;
}

Magnitude Magnitude::from_real(const Real& x) {
  if (x.is_zero()) return Magnitude();
  return from_log2(readop::log2(abs(x)));
}

const Real& Magnitude::log2() const {
  if (!log2_) throw std::logic_error("log2 of zero magnitude");
  return *log2_;
}

std::optional<Real> Magnitude::to_real(mpfr_prec_t precision) const {
  if (is_zero()) return Real(precision);
  const Real& l = *log2_;
  // Outside this window the linear value would overflow or underflow.
  const Real limit = Real::pow2(60, 64);
  if (abs(l) > limit) return std::nullopt;
  Real lp = l.with_precision(std::max<mpfr_prec_t>(precision + 64, l.precision()));
  Real r = exp2(lp);
  return r.with_precision(precision);
}

double Magnitude::approx() const {
  if (is_zero()) return 0.0;
  const double l = log2_->to_double();
  return std::exp2(l);
}

std::string Magnitude::to_string(int digits) const {
  if (is_zero()) return "0";
  std::string out = "2^(" + log2_->to_string(digits) + ")";
  const double l = log2_->to_double();
  if (std::fabs(l) < 1000.0) {
    const auto linear = to_real(std::max<mpfr_prec_t>(64, log2_->precision()));
    out += " (~" + linear->to_string(std::min(digits, 20)) + ")";
  }
  return out;
}

Magnitude operator*(const Magnitude& a, const Magnitude& b) {
  if (a.is_zero() || b.is_zero()) return Magnitude();
  return Magnitude::from_log2(*a.log2_ + *b.log2_);
}

Magnitude operator/(const Magnitude& a, const Magnitude& b) {
  if (b.is_zero()) throw std::domain_error("Magnitude division by zero");
  if (a.is_zero()) return Magnitude();
  return Magnitude::from_log2(*a.log2_ - *b.log2_);
}

namespace {

// log2(1 + sign * 2^d) for d <= 0 at `precision` bits; sign = -1 requires d < 0.
std::optional<Real> log2_one_plus(const Real& d, int sign, mpfr_prec_t precision) {
  // Below -(precision + 4) the correction is invisible at this precision.
  if (d < Real::from_long(-(static_cast<long>(precision) + 4), 64)) return std::nullopt;
  Real dd = d.with_precision(precision + 16);
  Real t = exp2(dd);
  if (sign < 0) t = -t;
  Real r(precision + 16);
  mpfr_log1p(r.get(), t.get(), MPFR_RNDN);
  Real ln2(precision + 16);
  mpfr_const_log2(ln2.get(), MPFR_RNDN);
  return r / ln2;
}

}  // namespace

Magnitude operator+(const Magnitude& a, const Magnitude& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const bool a_big = !(*a.log2_ < *b.log2_);
  const Real& hi = a_big ? *a.log2_ : *b.log2_;
  const Real& lo = a_big ? *b.log2_ : *a.log2_;
  const mpfr_prec_t prec = std::max(a.log2_->precision(), b.log2_->precision());
  // Only the fractional precision matters for the correction term.
  const mpfr_prec_t frac_prec = std::max<mpfr_prec_t>(64, std::min(prec, std::max(
      a.log2_->precision() - std::max<long>(0, a.log2_->exponent()),
      b.log2_->precision() - std::max<long>(0, b.log2_->exponent()))));
  Real d = lo - hi;
  const auto corr = log2_one_plus(d, +1, frac_prec);
  Real out = hi.with_precision(prec);
  if (corr) out += *corr;
  return Magnitude::from_log2(std::move(out));
}

std::partial_ordering operator<=>(const Magnitude& a, const Magnitude& b) {
  if (a.is_zero() && b.is_zero()) return std::partial_ordering::equivalent;
  if (a.is_zero()) return std::partial_ordering::less;
  if (b.is_zero()) return std::partial_ordering::greater;
  return *a.log2_ <=> *b.log2_;
}

Magnitude abs_difference(const Magnitude& a, const Magnitude& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const bool a_big = !(*a.log2_ < *b.log2_);
  const Real& hi = a_big ? *a.log2_ : *b.log2_;
  const Real& lo = a_big ? *b.log2_ : *a.log2_;
  if (hi == lo) return Magnitude();
  const mpfr_prec_t prec = std::max(a.log2_->precision(), b.log2_->precision());
  Real d = lo - hi;
  const auto corr = log2_one_plus(d, -1, std::max<mpfr_prec_t>(64, prec));
  Real out = hi.with_precision(prec);
  if (corr) out += *corr;
  return Magnitude::from_log2(std::move(out));
}

}  // namespace readop
