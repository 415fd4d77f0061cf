#include "reference.hpp"

#include <stdexcept>

namespace ref {

using readop::DyadicScalar;

namespace {

Int two_to(unsigned long k) {
  Int x;
  mpz_ui_pow_ui(x.get_mpz_t(), 2, k);
  return x;
}

Int root(const Int& x) {
  Int s;
  mpz_sqrt(s.get_mpz_t(), x.get_mpz_t());
  if (s * s != x) throw std::domain_error("not a square");
  return s;
}

Rational half(const Int& x) {
  Rational q(x, 2);
  q.canonicalize();
  return q;
}

DyadicScalar power_of_two(const Rational& t) { return DyadicScalar(Rational(1), t); }

}  // namespace

Params fixture(long generations) {
  Params p;
  p.push(Int(4), Int(324));
  p.push(Int(900), Int(10000));
  p.push(two_to(30), two_to(36));
  for (long n = 4; n <= generations; ++n) {
    const unsigned long k = 2 * (n + 1) * (n + 1);
    p.push(two_to(k), two_to(k + 2 * (n + 1)));
  }
  while (p.size() > generations) {
    p.a.pop_back();
    p.b.pop_back();
  }
  return p;
}

Params naive() {
  Params p;
  p.push(Int(4), Int(16));
  p.push(Int(64), Int(256));
  p.push(Int(1024), Int(4096));
  return p;
}

std::vector<Match> intervals(const Params& p, long n) {
  std::vector<Match> out;
  const Int& a = p.a[n];
  const Int& b = p.b[n];
  out.push_back({Case::Bfirst, n, 0, half(a), p.v(n - 1) + 1, a - 1});
  for (long r = 1; r <= n; ++r) out.push_back({Case::A, n, r, Rational(0), r * a, r * a + p.v(n - r)});
  for (long r = 1; r < n; ++r) {
    out.push_back({Case::B, n, r, half((2 * r + 1) * a), r * a + p.v(n - r) + 1, (r + 1) * a - 1});
  }
  for (long r = 1; r <= n; ++r) out.push_back({Case::C, n, r, Rational(0), r * (a + b), n * a + r * b});
  for (long r = 0; r < n; ++r) {
    out.push_back({Case::D, n, r, half((2 * r + 1) * b), n * a + r * b + 1, (r + 1) * (a + b) - 1});
  }
  return out;
}

std::vector<Match> matches(const Params& p, const Int& i) {
  std::vector<Match> out;
  if (i == 0) out.push_back({Case::Zero, 0, 0, Rational(0), Int(0), Int(0)});
  for (long n = 1; n <= p.size(); ++n) {
    for (auto& m : intervals(p, n)) {
      if (m.lo <= i && i <= m.hi) out.push_back(m);
    }
  }
  return out;
}

Rational weight(const Params& p, const Int& i) {
  for (const auto& m : matches(p, i)) {
    if (m.kind == Case::A) return Rational(1, m.r);
  }
  return Rational(1);
}

Match Model::region(const Int& i) const {
  auto found = matches(p_, i);
  if (found.size() != 1) throw std::logic_error("index not covered exactly once");
  return found.front();
}

void add_to(Vec& v, const Int& i, const ScalarSum& c) {
  ScalarSum& slot = v[i];
  slot += c;
  if (slot.is_zero()) v.erase(i);
}

Vec scaled(const Vec& v, const ScalarSum& c) {
  Vec out;
  for (const auto& [i, x] : v) add_to(out, i, x * c);
  return out;
}

Vec Model::f_in_e(const Int& i) const {
  const Match m = region(i);
  Vec out;
  switch (m.kind) {
    case Case::Zero:
      out[i] = ScalarSum(1);
      break;
    case Case::A: {
      const Int& w = p_.a[m.n - m.r];
      add_to(out, i, ScalarSum(Rational(w)));
      add_to(out, i - m.r * p_.a[m.n], ScalarSum(Rational(-w)));
      break;
    }
    case Case::Bfirst:
    case Case::B:
      out[i] = power_of_two((m.h - Rational(i)) / Rational(root(p_.a[m.n])));
      break;
    case Case::C:
      add_to(out, i, ScalarSum(1));
      add_to(out, i - p_.b[m.n], ScalarSum(Rational(-p_.b[m.n])));
      break;
    case Case::D:
      out[i] = power_of_two((m.h - Rational(i)) / Rational(root(p_.b[m.n])));
      break;
  }
  return out;
}

Vec Model::e_in_f(const Int& i) const {
  if (auto it = memo_.find(i); it != memo_.end()) return it->second;
  const Match m = region(i);
  Vec out;
  switch (m.kind) {
    case Case::Zero:
      out[i] = ScalarSum(1);
      break;
    case Case::A:
      // f_i = w (e_i - e_(i - r a_n))  =>  e_i = f_i / w + e_(i - r a_n)
      out = e_in_f(i - m.r * p_.a[m.n]);
      add_to(out, i, ScalarSum(Rational(Int(1), p_.a[m.n - m.r])));
      break;
    case Case::Bfirst:
    case Case::B:
      out[i] = power_of_two((Rational(i) - m.h) / Rational(root(p_.a[m.n])));
      break;
    case Case::C:
      out = scaled(e_in_f(i - p_.b[m.n]), ScalarSum(Rational(p_.b[m.n])));
      add_to(out, i, ScalarSum(1));
      break;
    case Case::D:
      out[i] = power_of_two((Rational(i) - m.h) / Rational(root(p_.b[m.n])));
      break;
  }
  memo_[i] = out;
  return out;
}

Vec Model::ehat_in_f(const Int& i) const {
  Vec out;
  for (const auto& [j, c] : e_in_f(i)) {
    const Rational w = weight(p_, j);
    add_to(out, j, c * DyadicScalar(1 / w));
  }
  return out;
}

Vec Model::t_column(const Int& i) const {
  Vec out;
  for (const auto& [j, c] : f_in_e(i)) {
    for (const auto& [k, x] : e_in_f(j + 1)) add_to(out, k, x * c);
  }
  return out;
}

Vec Model::s_column(const Int& i) const {
  const Rational di = weight(p_, i);
  Vec out;
  for (const auto& [j, c] : t_column(i)) add_to(out, j, c * DyadicScalar(di / weight(p_, j)));
  return out;
}

readop::Real value(const ScalarSum& x, int bits) {
  readop::Real total(bits);
  readop::Real term(bits);
  readop::Real scale(bits);
  mpfr_set_zero(total.get(), 1);
  for (const auto& m : x.terms()) {
    mpfr_set_q(scale.get(), m.exponent().get_mpq_t(), MPFR_RNDN);
    mpfr_exp2(scale.get(), scale.get(), MPFR_RNDN);
    mpfr_set_q(term.get(), m.mantissa().get_mpq_t(), MPFR_RNDN);
    mpfr_mul(term.get(), term.get(), scale.get(), MPFR_RNDN);
    mpfr_add(total.get(), total.get(), term.get(), MPFR_RNDN);
  }
  return total;
}

readop::Real norm(const Vec& v, int bits) {
  readop::Real total(bits);
  mpfr_set_zero(total.get(), 1);
  for (const auto& [i, c] : v) {
    readop::Real x = value(c, bits);
    mpfr_abs(x.get(), x.get(), MPFR_RNDN);
    mpfr_add(total.get(), total.get(), x.get(), MPFR_RNDN);
  }
  return total;
}

}  // namespace ref
