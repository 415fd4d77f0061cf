#include "readop/experiments.hpp"

#include "sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace readop {

namespace {

SparseVec unit_f(const Int& i) { return SparseVec::unit(BasisTag::F, i, ScalarSum(1)); }

std::string rc(long s, long n) { return "s" + std::to_string(s) + "n" + std::to_string(n); }

std::string log2_text(const Magnitude& m, int digits = 15) {
  return m.is_zero() ? "-inf" : m.log2().to_string(digits);
}

Int default_upto(const Schedule& s) {
  const long top = s.tail() ? 2 : std::min(2L, s.head_size());
  return s.v(top);
}

void add_config(Report& rep, const SuiteConfig& c) {
  rep.config.emplace_back("schedule", c.schedule_source);
  rep.config.emplace_back("schedule_fingerprint", c.schedule->fingerprint());
  rep.config.emplace_back("precision_bits", std::to_string(c.precision_bits));
  rep.config.emplace_back("seed", std::to_string(c.seed));
}

// Runs fn and records an exception as a failed check instead of aborting the suite.
template <class Fn>
void guarded(Report& rep, const std::string& part, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    rep.check(part + ".error", false, e.what());
  }
}

Report suite_conjugation(const SuiteConfig& c) {
  const Schedule& s = *c.schedule;
  const auto basis = std::make_shared<const BasisSystem>(c.schedule);
  const Int upto = c.upto.value_or(default_upto(s));
  Report rep;
  rep.name = "conjugation";
  add_config(rep, c);
  rep.config.emplace_back("upto", format_int(upto));

  const ValidationReport v = s.validate();
  for (const auto& chk : v.checks) {
    rep.check("schedule." + chk.name, chk.passed,
              chk.passed ? "generations 1.." + std::to_string(v.horizon) : chk.detail);
  }

  // Partition and weights over [0, upto].
  long bad = 0;
  std::string first_bad;
  for (Int i = 0; i <= upto; ++i) {
    const Region reg = s.classify(i);
    bool ok = reg.contains(i);
    if (sgn(i) == 0) {
      ok = ok && reg.n == 0;
    } else {
      ok = ok && reg.n >= 1 && i > s.v(reg.n - 1) && i <= s.v(reg.n);
    }
    const Rational w = s.d_weight(i);
    ok = ok && w == (reg.kind == RegionCase::A ? Rational(1, reg.r) : Rational(1));
    if (!ok && bad++ == 0) first_bad = format_int(i);
  }
  const long gens = sgn(upto) == 0 ? 0 : s.generation(upto);
  for (long n = 1; n <= gens; ++n) {
    Int next = s.v(n - 1) + 1;
    for (const Region& reg : s.regions_of_generation(n)) {
      if (reg.lo != next && bad++ == 0) first_bad = "generation " + std::to_string(n);
      next = reg.hi + 1;
    }
    if (next != s.v(n) + 1 && bad++ == 0) first_bad = "generation " + std::to_string(n);
  }
  rep.check("partition", bad == 0,
            bad == 0 ? "every index in [0, " + format_int(upto) + "] in exactly one region"
                     : std::to_string(bad) + " failures, first at " + first_bad);

  if (s.tail()) {
    Sampler rng(c.seed);
    long huge_bad = 0;
    constexpr long kHugeSamples = 1000;
    for (long k = 0; k < kHugeSamples; ++k) {
      const long n = rng.uniform(s.head_size() + 1, s.head_size() + 8);
      const Int i = rng.uniform(s.v(n - 1) + 1, s.v(n));
      const Region reg = s.classify(i);
      if (reg.n != n || !reg.contains(i)) ++huge_bad;
    }
    rep.check("partition-huge", huge_bad == 0,
              std::to_string(kHugeSamples) + " sampled indices from tail generations, " + std::to_string(huge_bad) +
                  " misclassified");
  }

  long rt_bad = 0;
  for (Int i = 0; i <= upto; ++i) {
    const SparseVec f = unit_f(i);
    const bool ok = basis->to_f(basis->f_in_e(i)) == f && basis->to_f(basis->f_in_ehat(i)) == f &&
                    basis->from_f(basis->e_in_f(i), BasisTag::E) == SparseVec::unit(BasisTag::E, i, ScalarSum(1)) &&
                    basis->from_f(basis->ehat_in_f(i), BasisTag::EHat) ==
                        SparseVec::unit(BasisTag::EHat, i, ScalarSum(1));
    if (!ok) ++rt_bad;
  }
  rep.check("basis-round-trip", rt_bad == 0, std::to_string(rt_bad) + " failures");

  const ConjugationReport cj = verify_conjugation(*basis, Int(0), upto);
  std::string detail = std::to_string(cj.checked) + " columns, " + std::to_string(cj.mismatch_count) + " mismatches";
  if (!cj.mismatches.empty()) detail += ", first at " + format_int(cj.mismatches.front());
  rep.check("formula-vs-direct", cj.passed(), detail);
  return rep;
}

Report suite_norms(const SuiteConfig& c) {
  const Schedule& s = *c.schedule;
  const Int upto = c.upto.value_or(default_upto(s));
  Report rep;
  rep.name = "norms";
  add_config(rep, c);
  rep.config.emplace_back("upto", format_int(upto));
  const ColumnNormReport r = column_norms(s, Int(0), upto, c.precision_bits);
  rep.check("bound", r.bound_ok, "max ||S f_i|| = " + r.max.to_string(15) + " at i = " + format_int(r.argmax));
  std::string near;
  for (const Int& i : r.near_max) near += (near.empty() ? "" : " ") + format_int(i);
  rep.note("columns attaining the maximum: " + near);
  Table& t = rep.table("column_norms", {"i", "log2_norm", "norm"});
  for (const auto& col : r.columns) {
    t.rows.push_back({format_int(col.i), log2_text(col.norm), std::to_string(col.norm.approx())});
  }
  return rep;
}

Report suite_rows(const SuiteConfig& c) {
  const Schedule& s = *c.schedule;
  const Int upto = c.upto.value_or(default_upto(s));
  Report rep;
  rep.name = "rows";
  add_config(rep, c);
  rep.config.emplace_back("row", format_int(c.row));
  rep.config.emplace_back("upto", format_int(upto));
  const RowReport r = row_entries(s, c.row, Int(0), upto, c.precision_bits);
  rep.check("decreasing", r.decreasing,
            r.min_log2_drop ? "smallest log2 drop between generations " + r.min_log2_drop->to_string(10)
                            : "fewer than two generations");
  const std::string stem = "row" + format_int(c.row);
  Table& g = rep.table(stem + "_generation_max", {"generation", "argmax", "log2_max"});
  for (const auto& m : r.per_generation) g.rows.push_back({std::to_string(m.generation), format_int(m.argmax), log2_text(m.max)});
  Table& t = rep.table(stem + "_entries", {"i", "generation", "coefficient", "log2_magnitude"});
  for (const auto& e : r.entries) {
    t.rows.push_back({format_int(e.i), std::to_string(e.generation), e.coefficient.to_string(), log2_text(e.magnitude)});
  }
  return rep;
}

void merge_as(Report& into, Report part, const std::string& name) {
  part.name = name;
  into.merge(part);
}

Report suite_witness(const SuiteConfig& c) {
  const auto basis = std::make_shared<const BasisSystem>(c.schedule);
  Report rep;
  rep.name = "witness";
  add_config(rep, c);
  rep.config.emplace_back("samples", std::to_string(c.samples));
  rep.config.emplace_back("toy_depth", std::to_string(c.toy_depth));

  guarded(rep, "strict", [&] {
    const WitnessParams w = choose_params(basis, {});
    merge_as(rep, check_recurrences(w), "strict.recurrences");
    merge_as(rep, check_properties(w, {c.samples, c.seed}), "strict.properties");
    for (long level = 0; level <= w.depth; ++level) {
      merge_as(rep, check_lemma_split(w, level, {8, c.seed, c.precision_bits}),
               "strict.split" + std::to_string(level));
    }
  });
  guarded(rep, "toy", [&] {
    WitnessOptions o;
    o.mode = WitnessMode::Toy;
    o.depth = c.toy_depth;
    const WitnessParams w = choose_params(basis, o);
    merge_as(rep, check_recurrences(w), "toy.recurrences");
    merge_as(rep, check_properties(w, {c.samples, c.seed}), "toy.properties");
    for (long level = 0; level <= w.depth; ++level) {
      merge_as(rep, check_lemma_split(w, level, {8, c.seed, c.precision_bits}), "toy.split" + std::to_string(level));
    }
    const Truncation t = x_infinity_truncation(w, 0, c.precision_bits);
    rep.note("toy x_infinity tail from level 0: " + (t.tail.bound ? t.tail.bound->to_string(12) : std::string("none")) +
             " (" + t.tail.note + ")");
  });
  return rep;
}

Report suite_separation(const SuiteConfig& c) {
  const auto basis = std::make_shared<const BasisSystem>(c.schedule);
  Report rep;
  rep.name = "separation";
  add_config(rep, c);
  rep.config.emplace_back("N", std::to_string(c.N));
  rep.config.emplace_back("samples", std::to_string(c.samples));
  const SeparationOptions so{c.N, c.samples, c.seed, c.precision_bits};
  guarded(rep, "strict", [&] { merge_as(rep, separation_check(choose_params(basis, {}), so), "strict"); });
  guarded(rep, "toy", [&] {
    WitnessOptions o;
    o.mode = WitnessMode::Toy;
    o.depth = c.toy_depth;
    merge_as(rep, separation_check(choose_params(basis, o), so), "toy");
  });
  return rep;
}

}  // namespace

std::vector<NonAdjointRow> nonadjoint_rows(std::shared_ptr<const BasisSystem> basis, long s_max, long n_max,
                                           int precision_bits) {
  if (!basis) throw std::invalid_argument("null basis");
  const Schedule& sch = basis->schedule();
  if (s_max < 1 || n_max <= s_max) throw std::invalid_argument("need 1 <= s_max < n_max");
  if (!sch.defined_at(n_max)) throw ScheduleRangeError("n_max beyond the schedule");
  const ColumnMap T(basis, OperatorKind::T);
  std::vector<NonAdjointRow> rows;
  for (long s = 1; s <= s_max; ++s) {
    const Int vs = sch.v(s);
    if (vs + 1 > kMaxNonAdjointPower) {
      throw std::runtime_error("v_" + std::to_string(s) + " + 1 = " + format_int(vs + 1) +
                               " column applications exceed the budget");
    }
    const Int k = vs + 1;
    const Int as = sch.a(s);
    for (long n = s + 1; n <= n_max; ++n) {
      NonAdjointRow row;
      row.s = s;
      row.n = n;
      const Int an = sch.a(n);
      row.f_index = (n - s) * an;
      const SparseVec f = unit_f(row.f_index);
      const SparseVec y = apply_power(T, f, k, PowerMethod::Iterate);
      row.orbit_agrees = y == apply_power(T, f, k, PowerMethod::Orbit);
      row.residual = y + dyadic(as) * basis->e_in_f(k);
      row.analytic = dyadic(as) * DyadicScalar::pow2(make_ratio(2 * (1 + vs) - an, 2 * sch.sqrt_a(n)));
      const Int target = row.f_index + k;
      row.identity_ok = row.residual == dyadic(as) * basis->e_in_f(target) &&
                        row.residual == SparseVec::unit(BasisTag::F, target, row.analytic);
      row.delta = norm_l1(row.residual, precision_bits);
      row.analytic_norm = row.analytic.magnitude(precision_bits);
      row.f_norm = norm_l1(f, precision_bits);
      row.limit_norm = as;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Report nonadjoint_report(std::shared_ptr<const BasisSystem> basis, long s_max, long n_max, int precision_bits) {
  Report rep;
  rep.name = "nonadjoint";
  rep.config = {{"s_max", std::to_string(s_max)},
                {"n_max", std::to_string(n_max)},
                {"precision_bits", std::to_string(precision_bits)}};
  const auto rows = nonadjoint_rows(basis, s_max, n_max, precision_bits);
  const mpfr_prec_t prec = precision_bits + 32;
  const Real tol = Real::pow2(-(precision_bits - 16), prec);
  Table& t = rep.table("delta", {"s", "n", "log2_delta", "analytic_log2", "gap", "analytic"});
  for (const auto& r : rows) {
    rep.check("identity." + rc(r.s, r.n), r.identity_ok,
              "residual = a_s e_" + format_int(r.f_index + 1 + basis->schedule().v(r.s)));
    rep.check("orbit." + rc(r.s, r.n), r.orbit_agrees, "column iteration equals the orbit jump");
    const Real diff = abs(r.delta.log2() - r.analytic_norm.log2());
    const Real scale = std::max(Real::from_long(1, prec), abs(r.analytic_norm.log2()));
    rep.check("analytic." + rc(r.s, r.n), diff <= tol * scale,
              "log2 delta = " + r.delta.log2().to_string(20) + ", delta ~ " + r.delta.to_string(12));
    // gap = ||a_s e_0|| / ||f_((n-s) a_n)||.
    const Magnitude gap = Magnitude::from_real(Real::from_int(r.limit_norm, prec)) / r.f_norm;
    t.rows.push_back({std::to_string(r.s), std::to_string(r.n), log2_text(r.delta, 20),
                      log2_text(r.analytic_norm, 20), gap.to_string(12),
                      r.analytic.to_string()});
  }
  for (long s = 1; s <= s_max; ++s) {
    bool dec = true;
    bool gap = true;
    const Magnitude one = Magnitude::one(prec);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].s != s) continue;
      gap = gap && rows[k].f_norm == one && rows[k].limit_norm > 1;
      if (k > 0 && rows[k - 1].s == s) dec = dec && rows[k].delta < rows[k - 1].delta;
    }
    rep.check("decreasing.s" + std::to_string(s), dec, "delta strictly decreases in n");
    rep.check("gap.s" + std::to_string(s), gap, "||f_((n-s) a_n)|| = 1 while ||a_s e_0|| = a_s > 1");
  }
  rep.note("computed: the residual identity, its norm, and the 1 versus a_s gap; the weak-star limit argument "
           "that turns these numbers into non-adjointness is not a finite computation");
  rep.note("equivalent norms: for a norm constant K choose s with a_s > K; the table needs no change");
  return rep;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"conjugation", "norms",      "rows", "witness",
                                              "separation",  "nonadjoint", "all"};
  return names;
}

Report build_suite(const std::string& name, const SuiteConfig& config) {
  if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end()) {
    throw std::invalid_argument("unknown suite: " + name);
  }
  if (!config.schedule) throw std::invalid_argument("suite needs a schedule");
  if (name == "conjugation") return suite_conjugation(config);
  if (name == "norms") return suite_norms(config);
  if (name == "rows") return suite_rows(config);
  if (name == "witness") return suite_witness(config);
  if (name == "separation") return suite_separation(config);
  if (name == "nonadjoint") {
    Report rep;
    rep.name = "nonadjoint";
    add_config(rep, config);
    guarded(rep, "nonadjoint", [&] {
      Report r = nonadjoint_report(std::make_shared<const BasisSystem>(config.schedule), config.s_max, config.n_max,
                                   config.precision_bits);
      rep.config.emplace_back("s_max", std::to_string(config.s_max));
      rep.config.emplace_back("n_max", std::to_string(config.n_max));
      rep.checks = std::move(r.checks);
      rep.tables = std::move(r.tables);
      rep.notes = std::move(r.notes);
    });
    return rep;
  }
  Report all;
  all.name = "all";
  add_config(all, config);
  for (const auto& part : suite_names()) {
    if (part != "all") all.merge(build_suite(part, config));
  }
  return all;
}

int run_suite(const std::string& name, const SuiteConfig& config) {
  if (name != "all") {
    const Report rep = build_suite(name, config);
    rep.write_bundle(config.out_dir / name);
    return rep.passed() ? 0 : 1;
  }
  if (!config.schedule) throw std::invalid_argument("suite needs a schedule");
  Report all;
  all.name = "all";
  add_config(all, config);
  for (const auto& part : suite_names()) {
    if (part == "all") continue;
    const Report rep = build_suite(part, config);
    rep.write_bundle(config.out_dir / part);
    all.check(part, rep.passed(), std::to_string(rep.checks.size()) + " checks");
  }
  all.write_bundle(config.out_dir / "all");
  return all.passed() ? 0 : 1;
}

}  // namespace readop
