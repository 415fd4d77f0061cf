#pragma once

// The increasing parameter sequence (a1, b1, a2, b2, ...), the derived v_n, and
// the classification of indices into the cases of the orbit construction.

#include "readop/numeric.hpp"
#include "readop/real.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace readop {

/// Index or generation outside the range the schedule defines.
class ScheduleRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// a_n = 2^(2(n+c)^2 alpha), b_n = 2^(2(n+c)^2 alpha + 2(n+c) beta) for n beyond the head.
struct TailFormula {
  long alpha = 1;
  long beta = 1;
  long offset = 0;

  std::uint64_t a_exponent(long n) const;
  std::uint64_t b_exponent(long n) const;
  friend bool operator==(const TailFormula&, const TailFormula&) = default;
};

enum class RegionCase { Zero, Bfirst, A, B, C, D };

const char* to_string(RegionCase c);

/// One case interval [lo, hi] of a generation. r is 0 for Zero/Bfirst; h is
/// the centre parameter for Bfirst/B/D and 0 otherwise.
struct Region {
  RegionCase kind = RegionCase::Zero;
  long n = 0;
  long r = 0;
  Rational h;
  Int lo;
  Int hi;

  bool contains(const Int& i) const { return lo <= i && i <= hi; }
  /// e.g. `B(n=2, r=1, h=1350)`.
  std::string to_string() const;
};

struct ScheduleCheck {
  std::string name;
  bool passed = true;
  long witness_n = 0;  // first violating generation, 0 when passed
  std::string detail;
};

struct ValidationReport {
  long horizon = 0;
  std::vector<ScheduleCheck> checks;
  bool passed() const;
};

class Schedule {
 public:
  Schedule(std::vector<std::pair<Int, Int>> head, std::optional<TailFormula> tail, bool square_flag = true);
  Schedule(const Schedule& other);
  Schedule& operator=(const Schedule&) = delete;

  /// (4, 324), (900, 10000), (2^30, 2^36) with tail alpha = beta = offset = 1.
  static Schedule fixture();
  /// (4, 16), (64, 256), (1024, 4096); deliberately too slow for the norm bound.
  static Schedule naive();

  /// JSON descriptor: {"head": [[a, b], ...], "tail": {"alpha", "beta", "offset"}, "square_flag"}.
  static Schedule from_json_text(const std::string& text);
  static Schedule load(const std::string& path);
  std::string to_json_text() const;
  /// FNV-1a of the canonical JSON text, as 16 hex digits.
  std::string fingerprint() const;

  long head_size() const { return static_cast<long>(head_.size()); }
  const std::optional<TailFormula>& tail() const { return tail_; }
  bool square_flag() const { return square_flag_; }
  bool defined_at(long n) const { return n >= 0 && (tail_ || n <= head_size()); }

  /// a_0 = 1, v_0 = 0.
  Int a(long n) const;
  Int b(long n) const;
  Int v(long n) const;
  /// Exact square roots; throws std::domain_error for non-squares.
  Int sqrt_a(long n) const;
  Int sqrt_b(long n) const;
  /// a_n, b_n as reals without materializing huge tail integers.
  Real a_real(long n, mpfr_prec_t precision) const;
  Real b_real(long n, mpfr_prec_t precision) const;

  /// Generation n >= 1 with v_{n-1} < i <= v_n; 0 for i = 0.
  long generation(const Int& i) const;
  Region classify(const Int& i) const;
  /// Ordered, non-empty regions of generation n >= 1, tiling (v_{n-1}, v_n].
  std::vector<Region> regions_of_generation(long n) const;
  /// 1/r on A(r) regions, 1 elsewhere.
  Rational d_weight(const Int& i) const;

  ValidationReport validate(long horizon = 0) const;

  friend bool operator==(const Schedule& x, const Schedule& y) {
    return x.head_ == y.head_ && x.tail_ == y.tail_ && x.square_flag_ == y.square_flag_;
  }

 private:
  struct Entry {
    Int a, b, v, sqrt_a, sqrt_b;
    bool have_sqrt_a = false, have_sqrt_b = false;
  };

  void require_defined(long n) const;
  std::shared_ptr<const Entry> entry(long n) const;
  Int raw_a(long n) const;
  Int raw_b(long n) const;
  /// Sign of i - v(n) without materializing v(n) when bit lengths decide.
  int compare_with_v(const Int& i, long n) const;

  std::vector<std::pair<Int, Int>> head_;
  std::optional<TailFormula> tail_;
  bool square_flag_ = true;

  // Values for small generations are kept; huge tail entries are recomputed.
  mutable std::shared_mutex mutex_;
  mutable std::map<long, std::shared_ptr<const Entry>> cache_;
  mutable std::map<long, std::shared_ptr<const Entry>> big_cache_;
};

}  // namespace readop
