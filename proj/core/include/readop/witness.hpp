#pragma once

// The sequences m_i, r_i, j_i, p_i, the vectors z_i, x_i and truncations of
// x_infinity, with checks of their support and separation properties.

#include "readop/lad.hpp"
#include "readop/operator.hpp"
#include "readop/report.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace readop {

enum class WitnessMode { Strict, Toy };

const char* to_string(WitnessMode mode);
WitnessMode parse_witness_mode(std::string_view text);

/// How r_{i+1} was obtained in strict mode: the interval [lower, lower + 1]
/// with lower = a(m_i - 1) * max over l <= v(m_i - 1) of ||ehat_l||.
struct RChoice {
  long level = 0;            // i
  Int scan_limit;            // v(m_i - 1)
  Int argmax;                // l attaining the max norm
  Magnitude max_norm;
  std::optional<Rational> max_norm_exact;  // when the maximizer has rational coefficients
  Int a_factor;              // a(m_i - 1)
  Real lower;
  std::optional<Rational> lower_exact;
  long chosen = 0;
};

struct WitnessParams {
  WitnessMode mode = WitnessMode::Strict;
  long m0 = 2;
  long depth = 1;
  long toy_r = 2;
  std::vector<long> m;  // m_0..m_depth
  std::vector<long> r;  // r_0..r_depth
  std::vector<Int> j;   // j_0..j_depth
  std::vector<DyadicScalar> p;  // p_0..p_{depth-1}
  std::vector<RChoice> r_choices;
  std::shared_ptr<const BasisSystem> basis;

  const Schedule& schedule() const { return basis->schedule(); }
  /// p_{i} with p_{-1} = 1.
  DyadicScalar p_at(long i) const;
};

struct WitnessOptions {
  long m0 = 2;
  WitnessMode mode = WitnessMode::Strict;
  long depth = 1;
  long toy_r = 2;
  std::optional<Int> j0;  // defaults to r_0 a(m_0)
  /// Largest v(m_i - 1) scanned exhaustively for the e-hat norm maximum.
  long scan_limit = 1000000;
};

WitnessParams choose_params(std::shared_ptr<const BasisSystem> basis, const WitnessOptions& options);

/// Exhaustive max of ||ehat_l|| over l <= limit.
RChoice scan_ehat_norms(const BasisSystem& basis, const Int& limit, int precision_bits = kDefaultPrecisionBits);

/// z_i for i < depth (f-basis, r_i + 1 terms).
SparseVec z(const WitnessParams& w, long i);
/// x_i = p_{i-1} ehat_{j_i} for i <= depth.
SparseVec x(const WitnessParams& w, long i);
/// x_i = ehat_{j_0} + sum_{k<i} p_k z_k.
SparseVec x_by_sum(const WitnessParams& w, long i);

struct TailBound {
  bool certified = false;
  /// Upper bound for sum_{i >= depth} ||p_i z_i|| when certified.
  std::optional<Magnitude> bound;
  /// Exact ||p_d z_d|| when level d is constructed.
  std::optional<Magnitude> first_term;
  /// Strict mode: log2 of a lower bound for the first term that cannot be built.
  std::optional<Real> obstruction_log2;
  long terms_summed = 0;
  std::string note;
};

struct Truncation {
  SparseVec x;
  TailBound tail;
};

Truncation x_infinity_truncation(const WitnessParams& w, long depth, int precision_bits = kDefaultPrecisionBits);

/// Log-domain upper bound for max ||ehat_l|| over l <= v(n), without materializing indices.
Magnitude ehat_norm_bound(const Schedule& s, long n, int precision_bits = kDefaultPrecisionBits);

/// Recurrences for m, j, p and the strict-mode interval for r.
Report check_recurrences(const WitnessParams& w);

struct PropertyOptions {
  long samples = 20;
  std::uint64_t seed = 1;
};

Report check_properties(const WitnessParams& w, const PropertyOptions& options);

/// min distance from e_0 to span{ehat_j : j_0 <= j <= m_0 a(m_0)}.
LadSolution constant_c(const WitnessParams& w, int precision_bits = kDefaultPrecisionBits);

struct SeparationOptions {
  long N = 100;
  long samples = 20;
  std::uint64_t seed = 1;
  int precision_bits = kDefaultPrecisionBits;
};

Report separation_check(const WitnessParams& w, const SeparationOptions& options);

struct LemmaSplitOptions {
  long random_indices = 8;
  std::uint64_t seed = 1;
  int precision_bits = kDefaultPrecisionBits;
};

Report check_lemma_split(const WitnessParams& w, long level, const LemmaSplitOptions& options);

}  // namespace readop
