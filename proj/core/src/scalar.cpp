#include "readop/scalar.hpp"

#include <algorithm>
#include <stdexcept>

namespace readop {

namespace {

// Largest integer exponent gap merged into a single exact mantissa.
constexpr std::uint64_t kMaxMergeGapBits = std::uint64_t{1} << 26;

Rational add_exponents(const Rational& a, const Rational& b) {
  if (sgn(a) == 0) return b;
  if (sgn(b) == 0) return a;
  const Int& da = a.get_den();
  const Int& db = b.get_den();
  if (is_power_of_two(da) && is_power_of_two(db)) {
    const auto ka = bit_length(da) - 1;
    const auto kb = bit_length(db) - 1;
    const auto k = std::max(ka, kb);
    Int num = (a.get_num() << (k - ka)) + (b.get_num() << (k - kb));
    return make_ratio(num, pow2(k));
  }
  return a + b;
}

long checked_small_exponent(const Rational& t) {
  const Int f = floor_of(t);
  if (!f.fits_slong_p() || abs(f) > (Int(1) << 40)) {
    throw std::overflow_error("dyadic exponent outside the linear range");
  }
  return f.get_si();
}

}  // namespace

DyadicScalar::DyadicScalar(Rational q, Rational t) : q_(std::move(q)), t_(std::move(t)) {
  q_.canonicalize();
  t_.canonicalize();
  canonicalize();
}

void DyadicScalar::canonicalize() {
  if (sgn(q_) == 0) {
    t_ = 0;
    return;
  }
  const auto vn = two_adic_valuation(q_.get_num());
  const auto vd = two_adic_valuation(q_.get_den());
  if (vn == 0 && vd == 0) return;
  q_.get_num() >>= vn;
  q_.get_den() >>= vd;
  Rational shift;
  if (vn >= vd) {
    shift = Rational(Int(vn - vd));
  } else {
    shift = Rational(-Int(vd - vn));
  }
  t_ = add_exponents(t_, shift);
}

Rational DyadicScalar::to_rational() const {
  if (!is_rational()) throw std::domain_error("irrational dyadic scalar");
  const Int& e = t_.get_num();
  if (::abs(e) > Int(kMaxMergeGapBits)) throw std::overflow_error("exponent too large for a rational");
  const long k = e.get_si();
  Rational r = q_;
  if (k >= 0) {
    r.get_num() <<= k;
  } else {
    r.get_den() <<= -k;
  }
  r.canonicalize();
  return r;
}

DyadicScalar DyadicScalar::inverse() const {
  if (is_zero()) throw std::domain_error("inverse of zero");
  DyadicScalar r;
  r.q_ = 1 / q_;
  r.t_ = -t_;
  return r;
}

DyadicScalar operator*(const DyadicScalar& a, const DyadicScalar& b) {
  if (a.is_zero() || b.is_zero()) return DyadicScalar();
  DyadicScalar r;
  r.q_ = a.q_ * b.q_;
  r.t_ = add_exponents(a.t_, b.t_);
  r.canonicalize();
  return r;
}

DyadicScalar operator-(const DyadicScalar& a) {
  DyadicScalar r = a;
  r.q_ = -r.q_;
  return r;
}

Magnitude DyadicScalar::magnitude(int precision_bits) const {
  if (is_zero()) return Magnitude();
  const mpfr_prec_t work = precision_bits + 16;
  Real lq = log2(Real::from_rational(sgn(q_) < 0 ? Rational(-q_) : q_, work));
  const mpfr_prec_t tprec = precision_for(bit_length(floor_of(t_)), precision_bits + 16);
  Real lt = Real::from_rational(t_, std::max(tprec, work));
  return Magnitude::from_log2(lt + lq);
}

Real DyadicScalar::to_real(int precision_bits) const {
  if (is_zero()) return Real(precision_bits);
  const long whole = checked_small_exponent(t_);
  const mpfr_prec_t work = precision_bits + 16;
  if (is_rational()) {
    Real r = Real::from_rational(q_, precision_bits);
    mpfr_mul_2si(r.get(), r.get(), whole, MPFR_RNDN);
    return r;
  }
  // Only the fractional part of t goes through exp2.
  Real r = exp2(Real::from_rational(t_ - Rational(Int(whole)), work)) * Real::from_rational(q_, work);
  mpfr_mul_2si(r.get(), r.get(), whole, MPFR_RNDN);
  return r.with_precision(precision_bits);
}

std::string DyadicScalar::to_string() const {
  return format_rational(q_) + " * 2^(" + format_rational(t_) + ")";
}

DyadicScalar DyadicScalar::parse(std::string_view text) {
  const auto marker = text.rfind(" * 2^(");
  if (marker == std::string_view::npos) return DyadicScalar(parse_rational(text));
  const auto open = marker + 6;
  const auto close = text.rfind(')');
  if (close == std::string_view::npos || close < open) {
    throw std::invalid_argument("bad dyadic scalar: " + std::string(text));
  }
  return DyadicScalar(parse_rational(text.substr(0, marker)),
                      parse_rational(text.substr(open, close - open)));
}

// ---------------------------------------------------------------------------

ScalarSum::ScalarSum(DyadicScalar x) {
  if (!x.is_zero()) terms_.push_back(std::move(x));
}

std::optional<DyadicScalar> ScalarSum::as_monomial() const {
  if (terms_.empty()) return DyadicScalar();
  if (terms_.size() == 1) return terms_.front();
  return std::nullopt;
}

ScalarSum& ScalarSum::operator+=(const DyadicScalar& x) {
  if (x.is_zero()) return *this;
  const Rational cls = fractional_part(x.exponent());
  auto it = terms_.begin();
  for (; it != terms_.end(); ++it) {
    const Rational c = fractional_part(it->exponent());
    if (c == cls) break;
    if (c > cls) {
      terms_.insert(it, x);
      return *this;
    }
  }
  if (it == terms_.end()) {
    terms_.push_back(x);
    return *this;
  }
  // Same class: q*2^t + q'*2^(t+k) = (q + q'*2^k) * 2^t with t the smaller exponent.
  const bool mine_low = it->exponent() <= x.exponent();
  const DyadicScalar& low = mine_low ? *it : x;
  const DyadicScalar& high = mine_low ? x : *it;
  const Rational gap = high.exponent() - low.exponent();
  const Int& k = gap.get_num();
  if (k > Int(kMaxMergeGapBits)) throw std::overflow_error("exponent gap too large to merge exactly");
  Rational hq = high.mantissa();
  hq.get_num() <<= k.get_ui();
  hq.canonicalize();
  DyadicScalar merged(low.mantissa() + hq, low.exponent());
  if (merged.is_zero()) {
    terms_.erase(it);
  } else {
    *it = std::move(merged);
  }
  return *this;
}

ScalarSum& ScalarSum::operator+=(const ScalarSum& x) {
  for (const auto& t : x.terms_) *this += t;
  return *this;
}

ScalarSum& ScalarSum::operator-=(const ScalarSum& x) {
  for (const auto& t : x.terms_) *this += -t;
  return *this;
}

ScalarSum& ScalarSum::operator*=(const DyadicScalar& x) {
  if (x.is_zero()) {
    terms_.clear();
    return *this;
  }
  // Classes shift uniformly, so re-insert to restore ordering.
  std::vector<DyadicScalar> old;
  old.swap(terms_);
  for (const auto& t : old) *this += t * x;
  return *this;
}

ScalarSum operator-(const ScalarSum& a) {
  ScalarSum r = a;
  for (auto& t : r.terms_) t = -t;
  return r;
}

ScalarSum operator*(const ScalarSum& a, const ScalarSum& b) {
  ScalarSum r;
  for (const auto& x : a.terms_) {
    for (const auto& y : b.terms_) r += x * y;
  }
  return r;
}

Magnitude ScalarSum::magnitude(int precision_bits) const {
  if (terms_.empty()) return Magnitude();
  if (terms_.size() == 1) return terms_.front().magnitude(precision_bits);

  std::vector<Real> logs;
  logs.reserve(terms_.size());
  for (const auto& t : terms_) logs.push_back(t.magnitude(precision_bits + 32).log2());
  const Real* top = &logs.front();
  for (const auto& l : logs) {
    if (*top < l) top = &l;
  }
  const Real top_log = *top;

  int log_terms = 0;
  while ((std::size_t{1} << log_terms) < terms_.size()) ++log_terms;
  mpfr_prec_t work = precision_bits + 32 + log_terms;
  for (int attempt = 0; attempt < 8; ++attempt, work *= 2) {
    Real acc(work);
    const Real cutoff = Real::from_long(-(static_cast<long>(work) + 8), 64);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      Real d = logs[k] - top_log;
      if (d < cutoff) continue;
      Real term = exp2(d.with_precision(work + 16)).with_precision(work);
      if (terms_[k].sign() < 0) {
        acc -= term;
      } else {
        acc += term;
      }
    }
    // Accept once the cancellation has not eaten into the requested bits.
    if (!acc.is_zero() && acc.exponent() > -(work - precision_bits - 16)) {
      return Magnitude::from_log2(top_log + log2(abs(acc)));
    }
  }
  throw std::runtime_error("magnitude: catastrophic cancellation not resolved");
}

Real ScalarSum::to_real(int precision_bits) const {
  Real acc(precision_bits + 32);
  for (const auto& t : terms_) acc += t.to_real(precision_bits + 32);
  return acc.with_precision(precision_bits);
}

std::string ScalarSum::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (k) out += " + ";
    out += terms_[k].to_string();
  }
  return out;
}

ScalarSum ScalarSum::parse(std::string_view text) {
  ScalarSum r;
  std::size_t start = 0;
  while (true) {
    const auto sep = text.find(" + ", start);
    const auto piece = text.substr(start, sep == std::string_view::npos ? std::string_view::npos : sep - start);
    r += DyadicScalar::parse(piece);
    if (sep == std::string_view::npos) break;
    start = sep + 3;
  }
  return r;
}

}  // namespace readop
