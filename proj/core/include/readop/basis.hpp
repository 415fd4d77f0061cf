#pragma once

// Finitely supported vectors over the f-, e- and e-hat systems, and the exact
// changes of basis between them.

#include "readop/scalar.hpp"
#include "readop/schedule.hpp"

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace readop {

enum class BasisTag { F, E, EHat };

/// "f", "e" or "ehat".
const char* to_string(BasisTag tag);
BasisTag parse_basis_tag(std::string_view text);

class SparseVec {
 public:
  using Map = std::map<Int, ScalarSum>;

  explicit SparseVec(BasisTag tag = BasisTag::F) : tag_(tag) {}
  static SparseVec unit(BasisTag tag, const Int& i, ScalarSum coefficient = ScalarSum(1));

  BasisTag tag() const { return tag_; }
  const Map& entries() const { return entries_; }
  bool is_zero() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  /// Adds c to coordinate i, dropping the entry if it cancels.
  void add(const Int& i, const ScalarSum& c);
  ScalarSum coefficient(const Int& i) const;
  /// Preconditions: !is_zero().
  const Int& min_index() const;
  const Int& max_index() const;
  std::vector<Int> support() const;

  SparseVec& operator+=(const SparseVec& o);
  SparseVec& operator-=(const SparseVec& o);
  SparseVec& operator*=(const DyadicScalar& c);
  SparseVec& operator*=(const ScalarSum& c);

  friend SparseVec operator+(SparseVec a, const SparseVec& b) { return a += b; }
  friend SparseVec operator-(SparseVec a, const SparseVec& b) { return a -= b; }
  friend SparseVec operator*(const DyadicScalar& c, SparseVec a) { return a *= c; }
  friend SparseVec operator*(const ScalarSum& c, SparseVec a) { return a *= c; }
  friend bool operator==(const SparseVec& a, const SparseVec& b) {
    return a.tag_ == b.tag_ && a.entries_ == b.entries_;
  }

  /// Same vector with indices moved by `shift` (must stay nonnegative).
  SparseVec shifted(const Int& shift) const;

  /// `f[(0, 1 * 2^(0)), (900, 1 * 2^(-2))]`; indices in format_int notation.
  std::string to_string() const;
  static SparseVec parse(std::string_view text);

 private:
  void require_same_tag(const SparseVec& o) const;

  BasisTag tag_;
  Map entries_;
};

/// Conversions between the three systems for one schedule. Expansions into the
/// f-basis are memoized; the memo is bounded and safe for concurrent readers.
class BasisSystem {
 public:
  explicit BasisSystem(std::shared_ptr<const Schedule> schedule);

  const Schedule& schedule() const { return *schedule_; }
  std::shared_ptr<const Schedule> schedule_ptr() const { return schedule_; }

  /// At most two entries, monomial coefficients.
  SparseVec f_in_e(const Int& i) const;
  SparseVec f_in_ehat(const Int& i) const;
  /// Triangular expansions; the largest index in the support is i.
  SparseVec e_in_f(const Int& i) const;
  SparseVec ehat_in_f(const Int& i) const;

  /// Expands an e- or e-hat-tagged vector in the f-basis; f vectors pass through.
  SparseVec to_f(const SparseVec& x) const;
  /// Rewrites an f-tagged vector in the e or e-hat system.
  SparseVec from_f(const SparseVec& x, BasisTag target) const;

  std::size_t cache_size() const;
  void clear_cache() const;

 private:
  SparseVec expand(const Int& i, bool hat) const;
  SparseVec f_in_system(const Int& i, bool hat) const;

  std::shared_ptr<const Schedule> schedule_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Int, SparseVec> e_cache_;
  mutable std::map<Int, SparseVec> ehat_cache_;
};

/// Exponent (h - i)/sqrt(a_n) or (h - i)/sqrt(b_n) of the Bfirst/B/D relation.
Rational centre_exponent(const Schedule& s, const Region& reg, const Int& i);

/// Exact dyadic form of an integer; powers of two never touch the mantissa.
DyadicScalar dyadic(const Int& x);

/// l1 norm of an f-basis vector; throws std::invalid_argument for other tags.
Magnitude norm_l1(const SparseVec& x, int precision_bits = kDefaultPrecisionBits);

}  // namespace readop
