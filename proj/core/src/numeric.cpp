#include "readop/numeric.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace readop {

namespace {

constexpr std::uint64_t kDecimalBits = 128;
constexpr std::size_t kMaxClusters = 16;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Int parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw std::invalid_argument("empty integer literal");
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("bad integer literal: " + std::string(s));
    }
  }
  return Int(std::string(s), 10);
}

std::uint64_t parse_u64(std::string_view s) {
  const Int v = parse_decimal(s);
  if (!v.fits_ulong_p()) throw std::invalid_argument("exponent too large: " + std::string(s));
  return v.get_ui();
}

// One `c*2^k`, `2^k` or decimal term.
Int parse_term(std::string_view term) {
  term = trim(term);
  const auto star = term.find('*');
  if (star != std::string_view::npos) {
    const auto rest = trim(term.substr(star + 1));
    if (rest.size() < 3 || rest.substr(0, 2) != "2^") {
      throw std::invalid_argument("bad term: " + std::string(term));
    }
    return parse_decimal(term.substr(0, star)) * pow2(parse_u64(rest.substr(2)));
  }
  if (term.size() >= 2 && term.substr(0, 2) == "2^") return pow2(parse_u64(term.substr(2)));
  return parse_decimal(term);
}

}  // namespace

std::uint64_t bit_length(const Int& x) {
  if (sgn(x) == 0) return 0;
  return mpz_sizeinbase(x.get_mpz_t(), 2);
}

Int pow2(std::uint64_t k) {
  Int r;
  mpz_setbit(r.get_mpz_t(), k);
  return r;
}

bool is_power_of_two(const Int& x) {
  return sgn(x) > 0 && mpz_scan1(x.get_mpz_t(), 0) + 1 == bit_length(x);
}

std::uint64_t two_adic_valuation(const Int& x) {
  if (sgn(x) == 0) throw std::domain_error("2-adic valuation of zero");
  return mpz_scan1(x.get_mpz_t(), 0);
}

std::optional<Int> exact_sqrt(const Int& x) {
  if (sgn(x) < 0) return std::nullopt;
  if (is_power_of_two(x)) {
    const auto k = bit_length(x) - 1;
    if (k % 2 != 0) return std::nullopt;
    return pow2(k / 2);
  }
  if (!mpz_perfect_square_p(x.get_mpz_t())) return std::nullopt;
  Int r;
  mpz_sqrt(r.get_mpz_t(), x.get_mpz_t());
  return r;
}

Rational make_ratio(const Int& num, const Int& den) {
  if (sgn(den) == 0) throw std::domain_error("zero denominator");
  if (is_power_of_two(den) && sgn(num) != 0) {
    const std::uint64_t k = bit_length(den) - 1;
    const std::uint64_t shift = std::min<std::uint64_t>(two_adic_valuation(num), k);
    Rational r;
    mpz_tdiv_q_2exp(r.get_num_mpz_t(), num.get_mpz_t(), shift);
    mpz_tdiv_q_2exp(r.get_den_mpz_t(), den.get_mpz_t(), shift);
    return r;
  }
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Int floor_of(const Rational& x) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Rational fractional_part(const Rational& x) {
  if (x.get_den() == 1) return Rational(0);
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  Rational f;
  mpz_swap(f.get_num_mpz_t(), r.get_mpz_t());
  mpz_set(f.get_den_mpz_t(), x.get_den_mpz_t());
  return f;
}

bool fits_long(const Int& x) { return x.fits_slong_p(); }

std::string format_int(const Int& x) {
  if (bit_length(x) <= kDecimalBits) return x.get_str(10);
  Int rem = abs(x);
  std::vector<std::pair<Int, std::uint64_t>> clusters;
  while (bit_length(rem) > 64 && clusters.size() < kMaxClusters) {
    std::uint64_t shift = bit_length(rem) - 64;
    Int hi = rem >> shift;
    const auto tz = two_adic_valuation(hi);
    hi >>= tz;
    shift += tz;
    rem -= hi << shift;
    clusters.emplace_back(std::move(hi), shift);
  }
  if (bit_length(rem) > 64) return x.get_str(10);
  std::ostringstream out;
  if (sgn(x) < 0) out << '-';
  bool first = true;
  for (const auto& [c, k] : clusters) {
    if (!first) out << '+';
    first = false;
    if (c != 1) out << c.get_str(10) << '*';
    out << "2^" << k;
  }
  if (sgn(rem) != 0) {
    if (!first) out << '+';
    out << rem.get_str(10);
  }
  return out.str();
}

Int parse_int(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty integer");
  bool negative = false;
  if (text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  } else if (text.front() == '+') {
    text.remove_prefix(1);
  }
  Int total = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto plus = text.find('+', start);
    const auto end = plus == std::string_view::npos ? text.size() : plus;
    total += parse_term(text.substr(start, end - start));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return negative ? Int(-total) : total;
}

std::string format_rational(const Rational& x) {
  if (x.get_den() == 1) return format_int(x.get_num());
  return format_int(x.get_num()) + "/" + format_int(x.get_den());
}

Rational parse_rational(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  const Int num = parse_int(text.substr(0, slash));
  const Int den = parse_int(text.substr(slash + 1));
  if (sgn(den) <= 0) throw std::invalid_argument("non-positive denominator");
  return make_ratio(num, den);
}

std::string summarize_int(const Int& x) {
  const auto bits = bit_length(x);
  if (bits <= 96) return x.get_str(10);
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, x.get_mpz_t());
  std::ostringstream out;
  out << (sgn(x) < 0 ? "-" : "") << "~2^" << std::fixed << std::setprecision(2)
      << static_cast<double>(exp) + std::log2(std::fabs(mant)) << " [" << bits << " bits]";
  return out.str();
}

}  // namespace readop
