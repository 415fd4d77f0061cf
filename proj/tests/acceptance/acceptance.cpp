// Acceptance run on the fixture schedule: one PASS/FAIL line per criterion.
//
//   readop_acceptance            run every criterion
//   readop_acceptance --only 4   run one criterion
//
// Exit status is 0 iff every selected criterion passed.

#include "readop/experiments.hpp"

#include "reference.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

namespace {

using namespace readop;

// Pinned tolerances.
constexpr long kNormLog2Bits = 150;        // |log2 max - 1/2| <= 2^-150
constexpr double kRowMarginLog2 = 50.0;    // generation maxima drop by at least 2^50
constexpr long kGapBits = 100;             // LP duality gap <= 2^-100
constexpr double kDeltaApprox = 0.2442;    // quoted Delta(2,1)
constexpr double kDeltaApproxTol = 1e-4;
constexpr double kLog2Delta3RelTol = 1e-3;  // against 329/2^15 - 2^14
constexpr long kExactBits = 150;            // "exact" log-domain comparisons at 200 bits
constexpr long kHugeSamples = 1000;
constexpr long kSeparationN = 100;
constexpr long kSeparationSamples = 20;
constexpr long kPropertySamples = 20;

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (passed) detail.clear();
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void info(const std::string& what) {
    if (passed) detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::shared_ptr<const Schedule> fixture_ptr() {
  static const auto s = std::make_shared<const Schedule>(Schedule::fixture());
  return s;
}

std::shared_ptr<const BasisSystem> basis_ptr() {
  static const auto b = std::make_shared<const BasisSystem>(fixture_ptr());
  return b;
}

const ref::Model& model() {
  static const ref::Model m(ref::fixture(3));
  return m;
}

RegionCase to_case(ref::Case c) {
  switch (c) {
    case ref::Case::Zero: return RegionCase::Zero;
    case ref::Case::Bfirst: return RegionCase::Bfirst;
    case ref::Case::A: return RegionCase::A;
    case ref::Case::B: return RegionCase::B;
    case ref::Case::C: return RegionCase::C;
    case ref::Case::D: return RegionCase::D;
  }
  return RegionCase::Zero;
}

bool same_region(const Region& reg, const ref::Match& m) {
  return reg.kind == to_case(m.kind) && reg.n == m.n && reg.r == m.r && reg.h == m.h && reg.lo == m.lo &&
         reg.hi == m.hi;
}

Real r200(long v) { return Real::from_long(v, 200); }

bool within_bits(const Real& a, const Real& b, long bits) { return abs(a - b) <= Real::pow2(-bits, 200); }

std::string num(const Real& x, int digits = 8) { return x.to_string(digits); }

// 1. Partition and weights.
Outcome partition_and_weights() {
  Outcome o;
  const Schedule& s = *fixture_ptr();
  const ref::Params p = ref::fixture(3);
  const long v2 = s.v(2).get_si();
  long bad = 0;
  for (long i = 0; i <= v2; ++i) {
    const auto m = ref::matches(p, Int(i));
    if (m.size() != 1 || !same_region(s.classify(Int(i)), m[0]) || s.d_weight(Int(i)) != ref::weight(p, Int(i))) {
      ++bad;
    }
  }
  o.require(bad == 0, std::to_string(bad) + " indices in [0, v_2] disagree with the reference partition");

  const ref::Params big = ref::fixture(12);
  gmp_randclass rng(gmp_randinit_mt);
  rng.seed(1);
  long huge_bad = 0;
  for (long k = 0; k < kHugeSamples; ++k) {
    const long n = 4 + k % 9;
    const auto regions = ref::intervals(big, n);
    const auto& m = regions[Int(rng.get_z_range(Int(static_cast<unsigned long>(regions.size())))).get_ui()];
    const Int i = k % 4 == 0 ? m.lo : k % 4 == 1 ? m.hi : Int(m.lo + rng.get_z_range(m.hi - m.lo + 1));
    const auto all = ref::matches(big, i);
    if (all.size() != 1 || !same_region(s.classify(i), all[0]) || s.d_weight(i) != ref::weight(big, i)) ++huge_bad;
  }
  o.require(huge_bad == 0, std::to_string(huge_bad) + " sampled huge indices misclassified");
  o.info(std::to_string(v2 + 1) + " indices and " + std::to_string(kHugeSamples) +
         " tail samples, exact weights");
  return o;
}

// 2. Basis round trip.
Outcome basis_round_trip() {
  Outcome o;
  const BasisSystem& b = *basis_ptr();
  const long v2 = fixture_ptr()->v(2).get_si();
  long bad = 0, ref_bad = 0;
  for (long k = 0; k <= v2; ++k) {
    const Int i(k);
    const SparseVec f = SparseVec::unit(BasisTag::F, i);
    const SparseVec e = b.e_in_f(i);
    const SparseVec h = b.ehat_in_f(i);
    if (b.to_f(b.f_in_e(i)) != f || b.to_f(b.f_in_ehat(i)) != f || b.from_f(e, BasisTag::E) != SparseVec::unit(BasisTag::E, i) ||
        b.from_f(h, BasisTag::EHat) != SparseVec::unit(BasisTag::EHat, i)) {
      ++bad;
    }
    if (e.entries() != model().e_in_f(i) || h.entries() != model().ehat_in_f(i)) ++ref_bad;
  }
  o.require(bad == 0, std::to_string(bad) + " round-trip failures");
  o.require(ref_bad == 0, std::to_string(ref_bad) + " expansions differ from the reference model");
  o.info("f<->e and f<->ehat identities for i <= " + std::to_string(v2));
  return o;
}

// 3. Conjugation identity.
Outcome conjugation() {
  Outcome o;
  const Schedule& s = *fixture_ptr();
  const Int v2 = s.v(2);
  const ConjugationReport rep = verify_conjugation(*basis_ptr(), Int(0), v2);
  o.require(rep.passed() && rep.checked == v2.get_si() + 1,
            std::to_string(rep.mismatch_count) + " formula/direct mismatches");
  long ref_bad = 0;
  for (long i = 0; i <= v2.get_si(); ++i) {
    if (s_column_formula(s, Int(i)).entries() != model().s_column(Int(i))) ++ref_bad;
  }
  o.require(ref_bad == 0, std::to_string(ref_bad) + " columns differ from the reference S = D^-1 T D");
  o.info(std::to_string(rep.checked) + " columns, 0 mismatches");
  return o;
}

// 4. Norm bound.
Outcome norm_bound() {
  Outcome o;
  const Schedule& s = *fixture_ptr();
  const ColumnNormReport rep = column_norms(s, Int(0), s.v(2));
  const Real half = Real::from_rational(Rational(1, 2), 200);
  o.require(within_bits(rep.max.log2(), half, kNormLog2Bits), "log2 max = " + num(rep.max.log2(), 20));
  o.require(rep.bound_ok && rep.max <= Magnitude::from_real(r200(2)), "max exceeds 2");

  Real ref_max(300);
  for (long i = 0; i <= s.v(2).get_si(); ++i) {
    const Real n = ref::norm(model().s_column(Int(i)), 300);
    if (n > ref_max) ref_max = n;
  }
  o.require(within_bits(log2(ref_max).with_precision(200), half, kNormLog2Bits),
            "reference max = " + num(ref_max, 20));

  const Schedule naive = Schedule::naive();
  const ColumnNormReport nrep = column_norms(naive, Int(0), naive.v(2));
  const ref::Model naive_model(ref::naive());
  Real naive_ref(300);
  for (long i = 0; i <= naive.v(2).get_si(); ++i) {
    const Real n = ref::norm(naive_model.s_column(Int(i)), 300);
    if (n > naive_ref) naive_ref = n;
  }
  o.require(!nrep.bound_ok && naive_ref > r200(2), "naive schedule does not violate the bound");
  o.info("max = 2^(1/2) at i = " + format_int(rep.argmax) + "; naive max ~ " + num(naive_ref, 6) + " > 2");
  return o;
}

// 5. Row decay.
Outcome row_decay() {
  Outcome o;
  const Schedule& s = *fixture_ptr();
  const RowReport rep = row_entries(s, Int(0), Int(0), s.v(2));
  std::map<long, Real> ref_max;
  for (long i = 0; i <= s.v(2).get_si(); ++i) {
    const auto col = model().s_column(Int(i));
    auto it = col.find(Int(0));
    if (it == col.end()) continue;
    const long n = s.generation(Int(i));
    const Real m = abs(ref::value(it->second, 300));
    auto [slot, fresh] = ref_max.try_emplace(n, m);
    if (!fresh && m > slot->second) slot->second = m;
  }
  if (ref_max.count(1) == 0 || ref_max.count(2) == 0 || rep.per_generation.size() < 2) {
    o.require(false, "row 0 has no entries in generations 1 and 2");
    return o;
  }
  const Real drop = (log2(ref_max.at(1)) - log2(ref_max.at(2))).with_precision(200);
  const Real lib_drop = rep.per_generation[0].max.log2() - rep.per_generation[1].max.log2();
  o.require(within_bits(drop, lib_drop, kExactBits), "library and reference maxima disagree");
  o.require(drop.sign() > 0, "maxima do not decrease");
  o.require(drop >= Real::from_double(kRowMarginLog2, 200),
            "log2 drop from n = 1 to n = 2 is " + num(drop, 6) + " < " + std::to_string(int(kRowMarginLog2)));
  o.info("log2 drop " + num(drop, 6));
  return o;
}

// 6. Witness recurrences.
Outcome witness_recurrences() {
  Outcome o;
  const Schedule& s = *fixture_ptr();
  const WitnessParams w = choose_params(basis_ptr(), {});

  Real best(200);
  for (long l = 0; l <= s.v(w.m[0] - 1).get_si(); ++l) {
    const Real n = ref::norm(model().ehat_in_f(Int(l)), 200);
    if (n > best) best = n;
  }
  const Int lower = to_int(best * Real::from_int(s.a(w.m[0] - 1), 200));
  o.require(Real::from_int(lower, 200) == best * Real::from_int(s.a(w.m[0] - 1), 200),
            "scan maximum is not an integer multiple");
  o.require(w.r[1] >= lower && w.r[1] <= lower + 1,
            "r_1 = " + std::to_string(w.r[1]) + " outside [" + format_int(lower) + ", " + format_int(lower + 1) + "]");
  o.require(w.r[0] == 1 && w.j[0] == s.a(w.m[0]), "r_0 or j_0");
  o.require(w.m[1] == w.m[0] + w.r[1], "m recurrence");
  o.require(w.j[1] == w.j[0] + w.r[0] * s.b(w.m[0]) + w.r[1] * s.a(w.m[1]), "j recurrence");
  o.require(w.p[0] == DyadicScalar(Rational(Int(1), s.b(w.m[0]))), "p_0");
  o.require(check_recurrences(w).passed(), "library recurrence report");
  const Report props = check_properties(w, {kPropertySamples, 1});
  for (const auto& c : props.checks) {
    if (c.id == "a" || c.id == "b") o.require(c.passed, "strict property " + c.id);
  }
  for (long i = 0; i <= w.depth; ++i) {
    const Int lo = w.r[i] * s.a(w.m[i]);
    o.require(w.j[i] >= lo && w.j[i] <= lo + s.v(w.m[i] - w.r[i]), "strict interval (a) at level " + std::to_string(i));
    o.require(x(w, i) == x_by_sum(w, i), "strict (b) at level " + std::to_string(i));
  }

  WitnessOptions t;
  t.mode = WitnessMode::Toy;
  t.depth = 3;
  const WitnessParams toy = choose_params(basis_ptr(), t);
  o.require(toy.m == std::vector<long>({2, 4, 6, 8}), "toy m sequence");
  for (long i = 0; i + 1 < static_cast<long>(toy.m.size()); ++i) {
    o.require(toy.j[i + 1] == toy.j[i] + toy.r[i] * s.b(toy.m[i]) + toy.r[i + 1] * s.a(toy.m[i + 1]),
              "toy j recurrence");
  }
  for (long i = 0; i <= toy.depth; ++i) {
    const Int lo = toy.r[i] * s.a(toy.m[i]);
    o.require(toy.j[i] >= lo && toy.j[i] <= lo + s.v(toy.m[i] - toy.r[i]), "toy (a) at level " + std::to_string(i));
    o.require(x(toy, i) == x_by_sum(toy, i), "toy (b) at level " + std::to_string(i));
  }
  const Report tp = check_properties(toy, {kPropertySamples, 1});
  o.require(tp.passed(), "toy property report failed");
  std::size_t c_rows = 0, d_rows = 0;
  for (const auto& tab : tp.tables) {
    if (tab.name == "c_samples") c_rows = tab.rows.size();
    if (tab.name == "d_samples") d_rows = tab.rows.size();
  }
  o.require(c_rows >= static_cast<std::size_t>(kPropertySamples), "fewer than 20 (c) pairs");
  o.require(d_rows >= static_cast<std::size_t>(kPropertySamples), "fewer than 20 (d) samples");
  o.info("r_1 = " + std::to_string(w.r[1]) + " in [" + format_int(lower) + ", " + format_int(lower + 1) +
         "]; toy m = (2, 4, 6, 8); (c) " + std::to_string(c_rows) + " pairs, (d) " + std::to_string(d_rows) +
         " samples");
  return o;
}

// 7. Separation.
Outcome separation() {
  Outcome o;
  const WitnessParams w = choose_params(basis_ptr(), {});
  const LadSolution c = constant_c(w);
  const Magnitude quarter = Magnitude::from_log2(r200(-2));
  o.require(c.certified, "LP not certified");
  o.require(!c.value.is_zero(), "C = 0");
  o.require(c.value.log2() <= quarter.log2() + Real::pow2(-kExactBits, 200), "C > 1/4");
  o.require(abs(c.duality_gap) <= Real::pow2(-kGapBits, 200), "duality gap " + num(c.duality_gap, 6));
  // x_0 = f_0 + f_900 / 4 is in the family's span and sits at distance exactly 1/4.
  const SparseVec x0 = x(w, 0);
  Rational d = 0;
  for (const auto& [i, coef] : x0.entries()) {
    const Rational v = coef.as_monomial()->to_rational();
    d += abs(i == 0 ? Rational(1 - v) : v);
  }
  o.require(d == Rational(1, 4), "feasible point distance " + d.get_str());

  const Report rep = separation_check(w, {kSeparationN, kSeparationSamples, 1, kDefaultPrecisionBits});
  for (const auto& ch : rep.checks) o.require(ch.passed, "separation check " + ch.id + ": " + ch.detail);
  o.info("C = " + c.value.to_string(10) + ", gap " + num(c.duality_gap, 3) + ", " +
         std::to_string(rep.checks.size()) + " separation checks");
  return o;
}

// 8. Non-adjointness numerics.
Outcome nonadjoint() {
  Outcome o;
  const auto rows = nonadjoint_rows(basis_ptr(), 1, 3);
  if (rows.size() != 2) {
    o.require(false, "expected rows n = 2, 3");
    return o;
  }
  const NonAdjointRow& r2 = rows[0];
  const NonAdjointRow& r3 = rows[1];
  o.require(r2.analytic == DyadicScalar(4) * DyadicScalar::pow2(Rational(-121, 30)), "Delta(2,1) monomial");
  o.require(std::abs(r2.delta.approx() - kDeltaApprox) <= kDeltaApproxTol, "Delta(2,1) ~ " + r2.delta.to_string(8));
  o.require(within_bits(r2.delta.log2(), r2.analytic_norm.log2(), kExactBits), "Delta(2,1) vs analytic");

  ref::Vec y;
  y[Int(900)] = ScalarSum(1);
  for (int k = 0; k < 329; ++k) {
    ref::Vec next;
    for (const auto& [i, c] : y) {
      for (const auto& [j, v] : model().t_column(i)) ref::add_to(next, j, c * v);
    }
    y = next;
  }
  for (const auto& [j, c] : model().e_in_f(Int(329))) ref::add_to(y, j, c * ScalarSum(4));
  o.require(y == ref::scaled(model().e_in_f(Int(1229)), ScalarSum(4)), "reference residual identity");
  o.require(r2.residual.entries() == y && r2.identity_ok && r3.identity_ok, "library residual identity");

  const Real exact3 = Real::from_rational(Rational(2) + Rational(329 - (1L << 29), 1L << 15), 200);
  o.require(within_bits(r3.delta.log2(), exact3, kExactBits), "log2 Delta(3,1) = " + num(r3.delta.log2(), 20));
  const double quoted = 329.0 / 32768.0 - 16384.0;
  o.require(std::abs(r3.delta.log2().to_double() - quoted) <= kLog2Delta3RelTol * std::abs(quoted),
            "log2 Delta(3,1) far from the quoted approximation");
  o.require(r3.delta < r2.delta, "Delta not decreasing in n");
  o.info("Delta(2,1) = " + r2.delta.to_string(8) + ", log2 Delta(3,1) = " + num(r3.delta.log2(), 12));
  return o;
}

// 9. Determinism.
Outcome determinism() {
  Outcome o;
  const auto root = std::filesystem::temp_directory_path() / ("readop_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  int status[2];
  for (int k = 0; k < 2; ++k) {
    SuiteConfig c;
    c.schedule = std::make_shared<const Schedule>(Schedule::fixture());
    c.seed = 1;
    c.out_dir = root / std::to_string(k);
    status[k] = run_suite("all", c);
  }
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::map<std::string, std::string> first;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root / "0")) {
    if (e.is_regular_file()) first[std::filesystem::relative(e.path(), root / "0").string()] = slurp(e.path());
  }
  long files = 0, differ = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root / "1")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = std::filesystem::relative(e.path(), root / "1").string();
    auto it = first.find(rel);
    if (it == first.end() || it->second != slurp(e.path())) ++differ;
  }
  std::filesystem::remove_all(root);
  o.require(files > 0 && files == static_cast<long>(first.size()), "bundles have different file sets");
  o.require(differ == 0, std::to_string(differ) + " files differ");
  o.require(status[0] == status[1], "exit statuses differ");
  o.info(std::to_string(files) + " files byte-identical, suite status " + std::to_string(status[0]));
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--only") == 0 && k + 1 < argc) {
      only = std::atoi(argv[++k]);
    } else {
      std::cerr << "usage: readop_acceptance [--only N]\n";
      return 2;
    }
  }
  const std::vector<Criterion> criteria{
      {1, "partition and weights", partition_and_weights},
      {2, "basis round trip", basis_round_trip},
      {3, "conjugation identity", conjugation},
      {4, "norm bound", norm_bound},
      {5, "row decay", row_decay},
      {6, "witness recurrences", witness_recurrences},
      {7, "separation", separation},
      {8, "non-adjointness numerics", nonadjoint},
      {9, "determinism", determinism},
  };
  bool all = true;
  bool ran = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && o.passed;
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(1);
    line << "criterion " << c.id << ": " << (o.passed ? "PASS" : "FAIL") << "  " << c.title << "  (" << o.detail
         << ") [" << secs << "s]\n";
    std::cout << line.str() << std::flush;
  }
  if (!ran) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  return all ? 0 : 1;
}
