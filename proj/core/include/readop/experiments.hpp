#pragma once

// The non-adjointness residuals and the named verification suites.

#include "readop/witness.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace readop {

/// Residual T^(v_s+1) f_((n-s) a_n) + a_s e_(v_s+1) for one (s, n).
struct NonAdjointRow {
  long s = 0;
  long n = 0;
  Int f_index;                // (n - s) a_n
  SparseVec residual;         // f-basis
  Magnitude delta;            // ||residual||
  DyadicScalar analytic;      // a_s 2^((1 + v_s - a_n/2) / sqrt(a_n))
  Magnitude analytic_norm;
  bool identity_ok = false;   // residual == analytic * f_((n-s) a_n + v_s + 1)
  bool orbit_agrees = false;  // column iteration matches the orbit jump
  Magnitude f_norm;           // ||f_((n-s) a_n)|| = 1
  Int limit_norm;             // a_s
};

/// Largest power v_s + 1 computed by column iteration.
inline constexpr long kMaxNonAdjointPower = 100000;

/// Rows for 1 <= s <= s_max and s < n <= n_max.
std::vector<NonAdjointRow> nonadjoint_rows(std::shared_ptr<const BasisSystem> basis, long s_max, long n_max,
                                           int precision_bits = kDefaultPrecisionBits);

Report nonadjoint_report(std::shared_ptr<const BasisSystem> basis, long s_max, long n_max,
                         int precision_bits = kDefaultPrecisionBits);

struct SuiteConfig {
  std::shared_ptr<const Schedule> schedule;
  std::string schedule_source = "fixture";
  int precision_bits = kDefaultPrecisionBits;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  /// Upper index for exhaustive sweeps; defaults to v_2 (or v of the last head generation).
  std::optional<Int> upto;
  Int row = 0;  // rows suite
  long samples = 20;
  long N = 100;
  long toy_depth = 3;
  long s_max = 1;
  long n_max = 3;
};

const std::vector<std::string>& suite_names();

/// Runs one suite (or "all") without writing anything.
Report build_suite(const std::string& name, const SuiteConfig& config);

/// Runs a suite and writes out_dir/<suite>/; "all" also writes each part. Returns 0 iff every check passed.
int run_suite(const std::string& name, const SuiteConfig& config);

}  // namespace readop
