#include "readop/witness.hpp"

#include "sampling.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace readop {

namespace {

constexpr std::uint64_t kCheapIndexBits = 4096;
constexpr long kMaxTailExtension = 64;
constexpr long kMaxCFamily = 200000;

DyadicScalar dyadic_pow(const DyadicScalar& x, long k) {
  if (x.is_zero()) throw std::domain_error("power of zero");
  const DyadicScalar base = k < 0 ? x.inverse() : x;
  const unsigned long e = static_cast<unsigned long>(k < 0 ? -k : k);
  Int num, den;
  mpz_pow_ui(num.get_mpz_t(), base.mantissa().get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.mantissa().get_den_mpz_t(), e);
  return DyadicScalar(make_ratio(num, den), base.exponent() * Rational(Int(static_cast<long>(e))));
}

Int ceil_of(const Rational& q) {
  Int f = floor_of(q);
  if (q != Rational(f)) f += 1;
  return f;
}

Real sqrt_real(Real x) {
  mpfr_sqrt(x.get(), x.get(), MPFR_RNDN);
  return x;
}

Real log2_a(const Schedule& s, long n, mpfr_prec_t prec) { return log2(s.a_real(n, prec)); }
Real log2_b(const Schedule& s, long n, mpfr_prec_t prec) { return log2(s.b_real(n, prec)); }

Magnitude mag(long k, mpfr_prec_t prec) { return Magnitude::from_real(Real::from_long(k, prec)); }

Magnitude tolerance(mpfr_prec_t prec) {
  Int ten20;
  mpz_ui_pow_ui(ten20.get_mpz_t(), 10, 20);
  return Magnitude::from_real(Real::from_rational(Rational(Int(1), ten20), prec));
}

// d >= c - tol.
bool at_least(const Magnitude& d, const Magnitude& c, const Magnitude& tol) {
  return d >= c || abs_difference(c, d) <= tol;
}

// Hash and equality for wide indices that usually differ in their low limb.
struct WideIndexHash {
  std::size_t operator()(const Int& x) const {
    return static_cast<std::size_t>(mpz_getlimbn(x.get_mpz_t(), 0)) ^
           (static_cast<std::size_t>(mpz_size(x.get_mpz_t())) << 48);
  }
};
struct WideIndexEq {
  bool operator()(const Int& x, const Int& y) const {
    return mpz_getlimbn(x.get_mpz_t(), 0) == mpz_getlimbn(y.get_mpz_t(), 0) && x == y;
  }
};

SparseVec unit_f(const Int& i) { return SparseVec::unit(BasisTag::F, i, ScalarSum(1)); }

bool disjoint(const SparseVec& x, const SparseVec& y) {
  for (const auto& [i, c] : x.entries()) {
    if (y.entries().count(i)) return false;
  }
  return true;
}

std::string short_int(const Int& x) { return bit_length(x) > 256 ? summarize_int(x) : format_int(x); }

bool all_rational(const SparseVec& v) {
  for (const auto& [i, c] : v.entries()) {
    for (const auto& t : c.terms()) {
      if (!t.is_rational()) return false;
    }
  }
  return true;
}

Rational exact_norm(const SparseVec& v) {
  Rational total;
  for (const auto& [i, c] : v.entries()) {
    for (const auto& t : c.terms()) total += abs(t.to_rational());
  }
  return total;
}

}  // namespace

const char* to_string(WitnessMode mode) { return mode == WitnessMode::Strict ? "strict" : "toy"; }

WitnessMode parse_witness_mode(std::string_view text) {
  if (text == "strict") return WitnessMode::Strict;
  if (text == "toy") return WitnessMode::Toy;
  throw std::invalid_argument("unknown witness mode: " + std::string(text));
}

DyadicScalar WitnessParams::p_at(long i) const {
  if (i == -1) return DyadicScalar(1);
  if (i < 0 || i >= static_cast<long>(p.size())) throw std::out_of_range("p index out of range");
  return p[i];
}

RChoice scan_ehat_norms(const BasisSystem& basis, const Int& limit, int precision_bits) {
  RChoice c;
  c.scan_limit = limit;
  SparseVec best;
  for (Int l = 0; l <= limit; ++l) {
    SparseVec v = basis.ehat_in_f(l);
    Magnitude n = norm_l1(v, precision_bits);
    if (l == 0 || n > c.max_norm) {
      c.max_norm = n;
      c.argmax = l;
      best = std::move(v);
    }
  }
  if (all_rational(best)) c.max_norm_exact = exact_norm(best);
  return c;
}

WitnessParams choose_params(std::shared_ptr<const BasisSystem> basis, const WitnessOptions& options) {
  if (!basis) throw std::invalid_argument("null basis");
  if (options.m0 < 2) throw std::invalid_argument("m0 must be at least 2");
  if (options.depth < 0) throw std::invalid_argument("depth must be nonnegative");
  if (options.toy_r < 1) throw std::invalid_argument("toy r must be positive");
  if (options.mode == WitnessMode::Strict && options.depth > 1) {
    throw std::invalid_argument("strict mode supports depth <= 1; deeper levels need toy mode");
  }
  const Schedule& s = basis->schedule();
  if (!s.defined_at(options.m0)) throw ScheduleRangeError("m0 beyond the schedule");

  WitnessParams w;
  w.mode = options.mode;
  w.m0 = options.m0;
  w.depth = options.depth;
  w.toy_r = options.toy_r;
  w.basis = basis;
  w.m = {options.m0};
  w.r = {1};
  const Int a0 = s.a(options.m0);
  Int j0 = options.j0.value_or(a0);
  if (j0 < a0 || j0 > a0 + s.v(options.m0 - 1)) {
    throw std::invalid_argument("j0 must lie in [a(m0), a(m0) + v(m0 - 1)]");
  }
  w.j = {j0};

  for (long i = 0; i < options.depth; ++i) {
    const long mi = w.m[i];
    long r_next = options.toy_r;
    if (options.mode == WitnessMode::Strict) {
      const Int limit = s.v(mi - 1);
      if (limit > options.scan_limit) {
        throw std::runtime_error("exhaustive e-hat norm scan up to " + short_int(limit) + " exceeds the scan limit " +
                                 std::to_string(options.scan_limit));
      }
      RChoice c = scan_ehat_norms(*basis, limit);
      c.level = i;
      c.a_factor = s.a(mi - 1);
      const mpfr_prec_t prec = precision_for(bit_length(c.a_factor) + 64, kDefaultPrecisionBits);
      Int chosen;
      if (c.max_norm_exact) {
        c.lower_exact = Rational(c.a_factor) * *c.max_norm_exact;
        c.lower = Real::from_rational(*c.lower_exact, prec);
        chosen = ceil_of(*c.lower_exact);
      } else {
        auto norm = c.max_norm.to_real(prec);
        if (!norm) throw std::overflow_error("e-hat norm maximum outside the linear range");
        c.lower = Real::from_int(c.a_factor, prec) * *norm;
        chosen = to_int(ceil(c.lower));
      }
      if (!fits_long(chosen)) throw std::overflow_error("r does not fit in a machine word");
      r_next = chosen.get_si();
      c.chosen = r_next;
      w.r_choices.push_back(std::move(c));
    }
    const long m_next = mi + r_next;
    if (!s.defined_at(m_next)) throw ScheduleRangeError("generation " + std::to_string(m_next) + " beyond the schedule");
    const DyadicScalar b_pow = dyadic_pow(dyadic(s.b(mi)), -w.r[i]);
    w.p.push_back(w.p_at(i - 1) * b_pow);
    w.j.push_back(w.j[i] + w.r[i] * s.b(mi) + r_next * s.a(m_next));
    w.m.push_back(m_next);
    w.r.push_back(r_next);
  }
  return w;
}

SparseVec z(const WitnessParams& w, long i) {
  if (i < 0 || i >= w.depth) throw std::out_of_range("z index out of range");
  const Schedule& s = w.schedule();
  const Int b = s.b(w.m[i]);
  const DyadicScalar bd = dyadic(b);
  SparseVec out(BasisTag::F);
  DyadicScalar coeff(1);
  for (long k = 0; k < w.r[i]; ++k) {
    out.add(w.j[i] + (w.r[i] - k) * b, coeff);
    coeff = coeff * bd;
  }
  out.add(w.j[i + 1], DyadicScalar(w.r[i + 1]) / dyadic(s.a(w.m[i])));
  return out;
}

SparseVec x(const WitnessParams& w, long i) {
  if (i < 0 || i > w.depth) throw std::out_of_range("x index out of range");
  return w.p_at(i - 1) * w.basis->ehat_in_f(w.j[i]);
}

SparseVec x_by_sum(const WitnessParams& w, long i) {
  if (i < 0 || i > w.depth) throw std::out_of_range("x index out of range");
  SparseVec out = w.basis->ehat_in_f(w.j[0]);
  for (long k = 0; k < i; ++k) out += w.p[k] * z(w, k);
  return out;
}

Magnitude ehat_norm_bound(const Schedule& s, long n, int precision_bits) {
  if (n < 0) throw std::invalid_argument("generation must be nonnegative");
  const mpfr_prec_t prec = precision_bits + 32;
  Magnitude u = Magnitude::one(prec);
  for (long k = 1; k <= n; ++k) {
    const Real a = s.a_real(k, prec);
    const Real b = s.b_real(k, prec);
    const Real one = Real::from_long(1, prec);
    const Real two = Real::from_long(2, prec);
    const Magnitude ua = u + mag(k, prec);
    const Magnitude ub = Magnitude::from_log2((a / two - one) / sqrt_real(a));
    const Magnitude ud =
        Magnitude::from_log2((Real::from_long(k, prec) * a + b / two - one) / sqrt_real(b));
    const Magnitude uc = Magnitude::from_log2(Real::from_long(k, prec) * log2(b)) * (mag(k, prec) + std::max(ua, ub));
    u = std::max({u, ua, ub, uc, ud});
  }
  return u;
}

Truncation x_infinity_truncation(const WitnessParams& w, long d, int precision_bits) {
  if (d < 0 || d > w.depth) throw std::out_of_range("truncation depth out of range");
  const Schedule& s = w.schedule();
  const mpfr_prec_t prec = precision_bits + 64;
  Truncation out{x(w, d), {}};
  TailBound& t = out.tail;

  Magnitude partial;
  for (long i = d; i < w.depth; ++i) {
    Magnitude term = norm_l1(w.p[i] * z(w, i), precision_bits);
    if (i == d) t.first_term = term;
    partial += term;
    ++t.terms_summed;
  }

  const long top = w.depth;
  Real log2p = top == 0 ? Real(prec) : w.p[top - 1].magnitude(prec).log2();

  if (w.mode == WitnessMode::Strict) {
    // r_{top+1} is at least a(g) ||ehat_l|| at the top of D(0) in generation g = m_top - 1.
    const long m = w.m[top];
    const long g = m - 1;
    const Real one = Real::from_long(1, prec);
    const Real ag = s.a_real(g, prec);
    const Real bg = s.b_real(g, prec);
    const Real span = (ag + bg / Real::from_long(2, prec) - one) / sqrt_real(bg);
    const Real log2p_top = log2p - Real::from_long(w.r[top], prec) * log2_b(s, m, prec);
    t.obstruction_log2 = log2p_top + log2(ag) + span - log2_a(s, m, prec);
    const Magnitude u = ehat_norm_bound(s, g, precision_bits);
    std::ostringstream note;
    note << "level " << top + 1 << " needs r >= a(" << g << ") * 2^(" << span.to_string(8)
         << "); the next term p_" << top << " z_" << top << " has log2 >= " << t.obstruction_log2->to_string(8)
         << " (upper estimate for log2 r: " << (log2(ag) + u.log2()).to_string(8)
         << "), so no tail bound is certified for this schedule";
    t.note = note.str();
    return out;
  }

  // Toy mode: extend m_i = m_{i-1} + toy_r and bound each further term by
  // p_{i-1} (r_i / b(m_i) + r_{i+1} / (a(m_i) b(m_i)^{r_i})).
  Magnitude total = partial;
  Magnitude prev;
  long m = w.m[top];
  long r = w.r[top];
  for (long step = 0; step < kMaxTailExtension; ++step) {
    if (!s.defined_at(m + w.toy_r)) {
      t.note = "schedule ends at generation " + std::to_string(s.head_size()) + " before the tail converged";
      return out;
    }
    const Real lb = log2_b(s, m, prec);
    const Real la = log2_a(s, m, prec);
    const Magnitude p_prev = Magnitude::from_log2(log2p);
    const Magnitude t1 = Magnitude::from_log2(log2(Real::from_long(r, prec)) - lb);
    const Magnitude t2 =
        Magnitude::from_log2(log2(Real::from_long(w.toy_r, prec)) - la - Real::from_long(r, prec) * lb);
    const Magnitude term = p_prev * (t1 + t2);
    total += term;
    ++t.terms_summed;
    log2p -= Real::from_long(r, prec) * lb;
    const bool negligible = term.log2() < total.log2() - Real::from_long(precision_bits + 16, prec);
    const bool halving = !prev.is_zero() && term.log2() <= prev.log2() - Real::from_long(1, prec);
    if (negligible && halving) {
      // Remainder of a series whose ratios stay below 1/2 is at most the last term.
      total += term;
      t.bound = total;
      t.certified = true;
      t.note = std::to_string(t.terms_summed) + " terms plus a geometric remainder";
      return out;
    }
    prev = term;
    m += w.toy_r;
    r = w.toy_r;
  }
  t.note = "tail estimate did not settle within " + std::to_string(kMaxTailExtension) + " extra terms";
  return out;
}

Report check_recurrences(const WitnessParams& w) {
  const Schedule& s = w.schedule();
  Report rep;
  rep.name = "recurrences";
  rep.config = {{"mode", to_string(w.mode)}, {"m0", std::to_string(w.m0)}, {"depth", std::to_string(w.depth)}};

  const long n = w.depth;
  bool ok = w.r[0] == 1 && w.m[0] >= 2;
  rep.check("r0", ok, "r_0 = " + std::to_string(w.r[0]) + ", m_0 = " + std::to_string(w.m[0]));

  ok = true;
  std::string detail;
  for (long i = 0; i < n; ++i) {
    if (w.m[i + 1] != w.m[i] + w.r[i + 1]) {
      ok = false;
      detail = "fails at i = " + std::to_string(i);
      break;
    }
  }
  rep.check("m-recurrence", ok, detail);

  const Int a0 = s.a(w.m[0]);
  ok = w.j[0] >= w.r[0] * a0 && w.j[0] <= w.r[0] * a0 + s.v(w.m[0] - w.r[0]);
  rep.check("j0-range", ok, "j_0 = " + short_int(w.j[0]));

  ok = true;
  detail.clear();
  for (long i = 0; i < n; ++i) {
    if (w.j[i + 1] != w.j[i] + w.r[i] * s.b(w.m[i]) + w.r[i + 1] * s.a(w.m[i + 1])) {
      ok = false;
      detail = "fails at i = " + std::to_string(i);
      break;
    }
  }
  rep.check("j-recurrence", ok, detail);

  // Rebuild p by repeated division.
  ok = true;
  detail.clear();
  DyadicScalar prod(1);
  for (long i = 0; i < n; ++i) {
    const DyadicScalar bd = dyadic(s.b(w.m[i]));
    for (long k = 0; k < w.r[i]; ++k) prod = prod / bd;
    if (!(prod == w.p[i])) {
      ok = false;
      detail = "fails at i = " + std::to_string(i);
      break;
    }
  }
  rep.check("p-product", ok, detail);

  if (w.mode == WitnessMode::Strict) {
    for (long i = 0; i < n; ++i) {
      const Int limit = s.v(w.m[i] - 1);
      const RChoice c = scan_ehat_norms(*w.basis, limit);
      const Int af = s.a(w.m[i] - 1);
      bool in = false;
      std::string how;
      if (c.max_norm_exact) {
        const Rational lo = Rational(af) * *c.max_norm_exact;
        in = Rational(w.r[i + 1]) >= lo && Rational(w.r[i + 1]) <= lo + 1;
        how = "L = " + format_rational(lo);
      } else {
        const mpfr_prec_t prec = precision_for(bit_length(af) + 64, kDefaultPrecisionBits);
        const Real lo = Real::from_int(af, prec) * *c.max_norm.to_real(prec);
        const Real rr = Real::from_long(w.r[i + 1], prec);
        in = rr >= lo && rr <= lo + Real::from_long(1, prec);
        how = "L = " + lo.to_string(20);
      }
      rep.check("r-interval." + std::to_string(i + 1), in,
                "r = " + std::to_string(w.r[i + 1]) + ", " + how + ", argmax l = " + short_int(c.argmax));
    }
  } else {
    rep.note("toy mode: r_i = " + std::to_string(w.toy_r) + " is not checked against the strict r interval");
  }

  Table& t = rep.table("sequence", {"i", "m", "r", "j", "p"});
  for (long i = 0; i <= n; ++i) {
    t.rows.push_back({std::to_string(i), std::to_string(w.m[i]), std::to_string(w.r[i]), short_int(w.j[i]),
                      i < n ? w.p[i].to_string() : ""});
  }
  return rep;
}

Report check_properties(const WitnessParams& w, const PropertyOptions& options) {
  const Schedule& s = w.schedule();
  const ColumnMap S(w.basis, OperatorKind::SFormula);
  Sampler rng(options.seed);
  Report rep;
  rep.name = "properties";
  rep.config = {{"mode", to_string(w.mode)},
                {"m0", std::to_string(w.m0)},
                {"depth", std::to_string(w.depth)},
                {"samples", std::to_string(options.samples)},
                {"seed", std::to_string(options.seed)}};

  // (a) j_i in A(r_i) of generation m_i.
  bool ok = true;
  std::string detail;
  for (long i = 0; i <= w.depth; ++i) {
    const Int ra = w.r[i] * s.a(w.m[i]);
    if (w.j[i] < ra || w.j[i] > ra + s.v(w.m[i] - w.r[i])) {
      ok = false;
      detail = "j_" + std::to_string(i) + " outside its interval";
      break;
    }
  }
  rep.check("a", ok, detail);

  // (b) x_{i+1} = x_i + p_i z_i and the closed sum.
  ok = true;
  detail.clear();
  for (long i = 0; i <= w.depth && ok; ++i) {
    const SparseVec xi = x(w, i);
    if (!(xi == x_by_sum(w, i))) {
      ok = false;
      detail = "closed sum differs at i = " + std::to_string(i);
    } else if (i < w.depth && !(x(w, i + 1) == xi + w.p[i] * z(w, i))) {
      ok = false;
      detail = "step fails at i = " + std::to_string(i);
    }
  }
  rep.check("b", ok, detail);

  // (c) S^l f_i = f_{i+l} inside A/C intervals of generations m_0, m_1.
  Table& tc = rep.table("c_samples", {"generation", "region", "i", "l", "ok"});
  long c_fail = 0;
  auto check_c = [&](long gen, const std::string& label, const Int& i, const Int& l) {
    const bool good = apply_power(S, unit_f(i), l) == unit_f(i + l);
    if (!good) ++c_fail;
    tc.rows.push_back({std::to_string(gen), label, short_int(i), short_int(l), good ? "true" : "false"});
  };
  {
    const long m = w.m[0];
    const Int i = w.j[0] + w.r[0] * s.b(m);
    const Int end = m * s.a(m) + w.r[0] * s.b(m);
    if (i <= end) check_c(m, "C(" + std::to_string(w.r[0]) + ")", i, end - i);
  }
  const long levels = std::min<long>(w.depth, 1) + 1;
  for (long k = 0; k < options.samples; ++k) {
    const long level = k % levels;
    const long n = w.m[level];
    const Int a = s.a(n);
    const bool cheap = bit_length(a) <= kCheapIndexBits;
    const bool use_c = cheap && (k / levels) % 2 == 1;
    long r;
    Int lo, hi;
    if (use_c) {
      r = rng.uniform(1L, n);
      const Int b = s.b(n);
      lo = r * (a + b);
      hi = n * a + r * b;
    } else {
      // Wide generations: keep the lower part i - r a inside small generations.
      r = rng.uniform(cheap ? 1L : std::max(1L, n - w.m0), n);
      lo = r * a;
      hi = lo + s.v(n - r);
    }
    const Int i = rng.uniform(lo, hi);
    const Int l = rng.uniform(Int(0), hi - i);
    check_c(n, std::string(use_c ? "C(" : "A(") + std::to_string(r) + ")", i, l);
  }
  rep.check("c", c_fail == 0, std::to_string(tc.rows.size()) + " pairs, " + std::to_string(c_fail) + " failures");

  // (d) min supp S^l z_k >= j_i + b(m_i) for k >= i and l < m_i a(m_i) - j_i.
  Table& td = rep.table("d_samples", {"i", "k", "l", "min_support", "ok"});
  long d_fail = 0;
  std::vector<std::pair<long, long>> combos;
  for (long i = 0; i < w.depth; ++i) {
    for (long k = i; k < w.depth; ++k) combos.emplace_back(i, k);
  }
  if (!combos.empty()) {
    const long total = std::max<long>(options.samples, 2 * static_cast<long>(combos.size()));
    for (long t = 0; t < total; ++t) {
      const auto [i, k] = combos[t % combos.size()];
      const long round = t / static_cast<long>(combos.size());
      const Int limit = w.m[i] * s.a(w.m[i]) - w.j[i] - 1;
      Int l = round == 0 ? Int(0) : round == 1 ? limit : rng.uniform(Int(0), limit);
      const SparseVec y = apply_power(S, z(w, k), l);
      const Int floor_index = w.j[i] + s.b(w.m[i]);
      const bool good = !y.is_zero() && y.min_index() >= floor_index;
      if (!good) ++d_fail;
      td.rows.push_back({std::to_string(i), std::to_string(k), short_int(l),
                         y.is_zero() ? "-" : short_int(y.min_index()), good ? "true" : "false"});
    }
    rep.check("d", d_fail == 0, std::to_string(td.rows.size()) + " samples, " + std::to_string(d_fail) + " failures");
  } else {
    rep.note("depth 0: no z vectors, support check (d) is vacuous");
  }
  return rep;
}

LadSolution constant_c(const WitnessParams& w, int precision_bits) {
  const Schedule& s = w.schedule();
  const Int hi = w.m[0] * s.a(w.m[0]);
  if (hi - w.j[0] + 1 > kMaxCFamily) throw std::runtime_error("family for C is too large");
  LadProblem p;
  for (Int j = w.j[0]; j <= hi; ++j) p.family.push_back(w.basis->ehat_in_f(j));
  p.target = unit_f(0);
  return solve_lad(p, precision_bits);
}

Report separation_check(const WitnessParams& w, const SeparationOptions& options) {
  const Schedule& s = w.schedule();
  const int bits = options.precision_bits;
  const mpfr_prec_t prec = bits + 32;
  if (options.N < 0) throw std::invalid_argument("N must be nonnegative");
  const Int reach = w.m[0] * s.a(w.m[0]) - w.j[0];
  if (options.N >= reach) {
    std::string hint = "no constructed level is deep enough";
    for (long i = 1; i <= w.depth; ++i) {
      if (options.N < w.m[i] * s.a(w.m[i]) - w.j[i]) {
        hint = "level " + std::to_string(i) + " would admit it";
        break;
      }
    }
    throw std::invalid_argument("N = " + std::to_string(options.N) + " must be below m0 a(m0) - j0 = " +
                                short_int(reach) + "; " + hint);
  }

  Report rep;
  rep.name = "separation";
  rep.config = {{"mode", to_string(w.mode)},         {"m0", std::to_string(w.m0)},
                {"depth", std::to_string(w.depth)},  {"N", std::to_string(options.N)},
                {"samples", std::to_string(options.samples)}, {"seed", std::to_string(options.seed)},
                {"precision_bits", std::to_string(bits)}};

  const LadSolution csol = constant_c(w, bits);
  const Magnitude C = csol.value;
  const Magnitude tol = tolerance(prec);
  rep.check("constant-c", csol.certified && !C.is_zero(),
            "C = " + C.to_string(12) + ", gap " + csol.duality_gap.to_string(6));

  const ColumnMap S(w.basis, OperatorKind::SFormula);
  const long N = options.N;
  std::vector<SparseVec> orbit;
  orbit.push_back(x(w, 0));
  for (long l = 1; l <= N; ++l) orbit.push_back(S.apply(orbit.back()));
  bool orbit_ok = true;
  for (long l = 0; l <= N && orbit_ok; ++l) orbit_ok = orbit[l] == w.basis->ehat_in_f(w.j[0] + l);
  rep.check("orbit", orbit_ok, "S^l x_0 = ehat_{j0+l} for l <= " + std::to_string(N));

  const SparseVec e0 = unit_f(0);
  const Int p_end = w.m[0] * s.a(w.m[0]);
  const Int q_start = w.j[0] + s.b(w.m[0]);

  // Q_l = sum_k S^l (p_k z_k). Its indices are as wide as the deepest
  // generation, so coordinates are relabelled once by small ids.
  std::vector<SparseVec> tail(N + 1, SparseVec(BasisTag::F));
  std::unordered_map<Int, long, WideIndexHash, WideIndexEq> label;
  bool tail_above = true;
  for (long k = 0; k < w.depth; ++k) {
    SparseVec y = w.p[k] * z(w, k);
    for (long l = 0; l <= N; ++l) {
      if (l > 0) y = S.apply(y);
      for (const auto& [i, c] : y.entries()) {
        if (i < q_start) tail_above = false;
        const auto [it, fresh] = label.try_emplace(i, static_cast<long>(label.size()));
        tail[l].add(Int(it->second), c);
      }
    }
  }
  rep.check("tail-support", tail_above && q_start > p_end,
            "S^l p_k z_k starts at or above j0 + b(m0) = " + short_int(q_start) + " > m0 a(m0)");

  Sampler rng(options.seed);
  Table& t = rep.table("samples", {"sample", "dist_P", "dist_P_plus_Q", "line_lad", "supports_ok", "ok"});
  long failures = 0;
  auto run = [&](const std::string& label, const std::vector<Rational>& alpha) {
    SparseVec P(BasisTag::F), Q(BasisTag::F);
    for (long l = 0; l <= N; ++l) {
      if (sgn(alpha[l]) == 0) continue;
      const DyadicScalar c(alpha[l]);
      P += c * orbit[l];
      Q += c * tail[l];
    }
    const bool supports = (P.is_zero() || P.max_index() <= p_end) && tail_above && q_start > p_end;
    const Magnitude dp = distance(P, e0, bits);
    // Disjoint supports, neither meeting the other: the norms add.
    const Magnitude dpq = dp + norm_l1(Q, bits);
    Magnitude line = Magnitude::one(prec);
    if (!P.is_zero()) line = solve_lad({{P}, e0}, bits).value;
    const bool good = supports && at_least(dp, C, tol) && at_least(dpq, C, tol) && at_least(line, C, tol);
    if (!good) ++failures;
    t.rows.push_back({label, dp.to_string(12), dpq.to_string(12), line.to_string(12), supports ? "true" : "false",
                      good ? "true" : "false"});
  };
  std::vector<Rational> alpha(N + 1);
  run("zero", alpha);
  alpha[0] = 1;
  run("unit", alpha);
  for (long k = 0; k < options.samples; ++k) {
    for (auto& a : alpha) a = rng.rational();
    run(std::to_string(k), alpha);
  }
  rep.check("samples", failures == 0,
            std::to_string(t.rows.size()) + " combinations, " + std::to_string(failures) + " below C");

  const LadSolution span = solve_lad({orbit, e0}, bits);
  rep.check("orbit-span", span.certified && at_least(span.value, C, tol),
            "min over span = " + span.value.to_string(12) + ", C = " + C.to_string(12));

  const Truncation tr = x_infinity_truncation(w, w.depth, bits);
  if (tr.tail.certified && tr.tail.bound) {
    rep.note("tail of x_infinity beyond level " + std::to_string(w.depth) + " is at most " +
             tr.tail.bound->to_string(12));
  } else {
    rep.note("tail not certified: " + tr.tail.note);
  }
  rep.note("supp P lies in [0, m0 a(m0)] and supp Q above j0 + b(m0), so dist(P + Q, e_0) = dist(P, e_0) + ||Q||");
  return rep;
}

Report check_lemma_split(const WitnessParams& w, long level, const LemmaSplitOptions& options) {
  if (level < 0 || level > w.depth) throw std::out_of_range("level out of range");
  const Schedule& s = w.schedule();
  const BasisSystem& B = *w.basis;
  const int bits = options.precision_bits;
  const mpfr_prec_t prec = bits + 32;
  Report rep;
  rep.name = "lemma-split";
  rep.config = {{"mode", to_string(w.mode)},
                {"level", std::to_string(level)},
                {"random_indices", std::to_string(options.random_indices)},
                {"seed", std::to_string(options.seed)}};

  const LadSolution csol = constant_c(w, bits);
  const Magnitude C = csol.value;
  const Magnitude tol = tolerance(prec);
  const SparseVec e0 = unit_f(0);

  if (level == 0) {
    rep.check("base-case", csol.certified, "span of ehat_j, j0 <= j <= m0 a(m0), keeps distance C = " +
                                               C.to_string(12) + " from e_0");
    return rep;
  }

  const long i = level;
  const long mi = w.m[i];
  const long ri = w.r[i];
  const long mp = w.m[i - 1];
  const long rp = w.r[i - 1];
  const Int a = s.a(mi);
  const Int top = mi * a;
  const Int y1_end = ri * a + s.v(mp);

  // Sample indices: region boundaries, shifted lower-generation boundaries, random.
  std::set<Int> idx{w.j[i], top};
  auto keep = [&](const Int& k) {
    if (k >= w.j[i] && k <= top) idx.insert(k);
  };
  for (long r = ri; r <= mi; ++r) {
    const Int lo = r * a;
    const Int hi = lo + s.v(mi - r);
    keep(lo);
    keep(hi);
    if (r < mi) {
      keep(hi + 1);
      keep((r + 1) * a - 1);
    }
  }
  const Int t_lo = w.j[i - 1] + rp * s.b(mp);
  for (const Region& reg : s.regions_of_generation(mp)) {
    if (reg.kind != RegionCase::C && reg.kind != RegionCase::D) continue;
    for (const Int& e : {reg.lo, reg.hi}) {
      if (e >= t_lo) keep(ri * a + e);
    }
  }
  Sampler rng(options.seed);
  for (long k = 0; k < options.random_indices; ++k) idx.insert(rng.uniform(w.j[i], top));

  SparseVec y(BasisTag::F), y1(BasisTag::F), y2(BasisTag::F), y3(BasisTag::F);
  SparseVec y1p(BasisTag::F), y1pp(BasisTag::F), y2p(BasisTag::F), y2pp(BasisTag::F);
  SparseVec za(BasisTag::F), zb(BasisTag::F), zbp(BasisTag::F), zbpp_hat(BasisTag::EHat);
  bool partition = true;
  bool beta_range = true;
  bool ab_partition = true;
  bool zb_hat_range = true;
  long n1 = 0, n2 = 0, n3 = 0;
  for (const Int& j : idx) {
    const DyadicScalar g(rng.rational());
    const SparseVec e = B.ehat_in_f(j);
    y += g * e;
    if (j <= y1_end) {
      ++n1;
      y1 += g * e;
      const Int t = j - ri * a;
      y1p += g * B.ehat_in_f(t);
      y1pp.add(j, g * (DyadicScalar(ri) / dyadic(s.a(mi - ri))));
      if (t < t_lo || t > s.v(mp)) beta_range = false;
      const Region lower = s.classify(t);
      const DyadicScalar beta = g;
      if (lower.n == mp && lower.kind == RegionCase::D && lower.r >= rp) {
        za += beta * B.ehat_in_f(t);
      } else if (lower.n == mp && lower.kind == RegionCase::C && lower.r >= rp) {
        zb += beta * B.ehat_in_f(t);
        const Int bp = s.b(mp);
        DyadicScalar c = beta;
        for (long k = 0; k < lower.r; ++k) {
          zbp.add(t - k * bp, c);
          c = c * dyadic(bp);
        }
        const Int base = t - lower.r * bp;
        zbpp_hat.add(base, c);
        if (base < w.j[i - 1] || base > mp * s.a(mp)) zb_hat_range = false;
      } else {
        ab_partition = false;
      }
      continue;
    }
    const Region reg = s.classify(j);
    if (reg.n == mi && reg.kind == RegionCase::A && reg.r > ri) {
      ++n2;
      y2 += g * e;
      y2p += g * B.ehat_in_f(j - reg.r * a);
      y2pp.add(j, g * (DyadicScalar(reg.r) / dyadic(s.a(mi - reg.r))));
    } else if (reg.n == mi && reg.kind == RegionCase::B && reg.r >= ri && reg.r < mi) {
      ++n3;
      y3 += g * e;
    } else {
      partition = false;
    }
  }
  rep.check("partition", partition,
            std::to_string(n1) + " indices in y1, " + std::to_string(n2) + " in y2, " + std::to_string(n3) + " in y3");

  // Supports.
  bool y3_ok = true;
  for (const auto& [k, c] : y3.entries()) {
    const Region reg = s.classify(k);
    if (!(reg.n == mi && reg.kind == RegionCase::B && reg.r >= ri)) y3_ok = false;
  }
  rep.check("y3-support", y3_ok, "inside the B shells of generation " + std::to_string(mi));

  const SparseVec y12 = y1 + y2;
  bool y12_ok = true;
  const Int vshift = s.v(mi - ri);
  for (const auto& [k, c] : y12.entries()) {
    bool in = k <= y1_end;
    for (long r = ri + 1; r <= mi && !in; ++r) in = k >= r * a && k <= r * a + vshift;
    if (!in) y12_ok = false;
  }
  rep.check("y12-support", y12_ok && disjoint(y12, y3), "y1 + y2 lives on the A intervals, disjoint from y3");

  const Magnitude d_y = distance(y, e0, bits);
  const Magnitude d_y12 = distance(y12, e0, bits);
  rep.check("drop-y3", at_least(d_y, d_y12, tol), "dist(y) = " + d_y.to_string(12) + ", dist(y1+y2) = " +
                                                        d_y12.to_string(12));

  // y2 = y2' + y2'' with y2'' disjoint from the rest and away from 0.
  rep.check("y2-split", y2 == y2p + y2pp, std::to_string(n2) + " terms");
  rep.check("y2pp-disjoint", disjoint(y2pp, y1 + y2p) && !y2pp.entries().count(Int(0)));
  const Magnitude d_y1 = distance(y1, e0, bits);
  if (w.mode == WitnessMode::Strict) {
    const Magnitude n2p = norm_l1(y2p, bits);
    const Magnitude n2pp = norm_l1(y2pp, bits);
    rep.check("y2-norms", n2p <= n2pp, "||y2'|| = " + n2p.to_string(12) + ", ||y2''|| = " + n2pp.to_string(12));
    rep.check("drop-y2", at_least(d_y12, d_y1, tol),
              "dist(y1+y2) = " + d_y12.to_string(12) + ", dist(y1) = " + d_y1.to_string(12));
  } else {
    rep.note("norm comparison of y2' and y2'' skipped: the r interval is not enforced in toy mode");
  }

  // y1 = y1' + y1''.
  rep.check("y1-split", y1 == y1p + y1pp, std::to_string(n1) + " terms");
  const bool y1_supports = (y1p.is_zero() || y1p.max_index() <= s.v(mp)) &&
                           (y1pp.is_zero() || y1pp.min_index() >= w.j[i]) && w.j[i] > s.v(mp);
  rep.check("y1-supports", y1_supports, "supp y1' in [0, v(m_{i-1})], supp y1'' above j_i");
  rep.check("beta-range", beta_range, "shifted indices in [j_{i-1} + r_{i-1} b, v(m_{i-1})]");
  const Magnitude d_y1p = distance(y1p, e0, bits);
  rep.check("drop-y1pp", at_least(d_y1, d_y1p, tol),
            "dist(y1) = " + d_y1.to_string(12) + ", dist(y1') = " + d_y1p.to_string(12));

  // y1' = z_a + z_b, z_b = z_b' + z_b''.
  rep.check("ab-partition", ab_partition && y1p == za + zb, "D regions to z_a, C regions to z_b");
  const SparseVec zbpp = B.to_f(zbpp_hat);
  rep.check("zb-split", zb == zbp + zbpp);
  rep.check("zb-hat-range", zb_hat_range, "ehat indices of z_b'' in [j_{i-1}, m_{i-1} a(m_{i-1})]");
  const Int low_top = mp * s.a(mp);
  const bool zbpp_low = zbpp.is_zero() || zbpp.max_index() <= low_top;
  const SparseVec upper = za + zbp;
  const bool upper_high = upper.is_zero() || upper.min_index() > low_top;
  rep.check("zb-disjoint", zbpp_low && upper_high, "z_b'' below m_{i-1} a(m_{i-1}) < supp(z_a + z_b')");
  const Magnitude d_zb = distance(zbpp, e0, bits);
  rep.check("distance-chain", at_least(d_y1p, d_zb, tol) && at_least(d_zb, C, tol),
            "dist(y1') = " + d_y1p.to_string(12) + ", dist(z_b'') = " + d_zb.to_string(12) + ", C = " +
                C.to_string(12));
  return rep;
}

}  // namespace readop
