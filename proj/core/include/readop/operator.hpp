#pragma once

// Columns of T, D, D^-1 and S = D^-1 T D in the f-basis, the closed-form
// column table of S, and the finite-section reports built on them.

#include "readop/basis.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace readop {

enum class OperatorKind { T, D, Dinv, SDirect, SFormula };

const char* to_string(OperatorKind kind);

/// T f_i: expand f_i in e, shift e_j -> e_{j+1}, expand back.
SparseVec t_column(const BasisSystem& basis, const Int& i);
/// S f_i through the e-hat orbit (S ehat_j = ehat_{j+1}).
SparseVec s_column_direct(const BasisSystem& basis, const Int& i);
/// S f_i from the nine-line closed-form table; uses only schedule values.
SparseVec s_column_formula(const Schedule& s, const Int& i);
SparseVec d_column(const Schedule& s, const Int& i);
SparseVec dinv_column(const Schedule& s, const Int& i);

/// Index i -> column (f-basis) of one operator.
class ColumnMap {
 public:
  ColumnMap(std::shared_ptr<const BasisSystem> basis, OperatorKind kind);

  OperatorKind kind() const { return kind_; }
  const BasisSystem& basis() const { return *basis_; }
  SparseVec column(const Int& i) const;
  /// Linear extension to an f-basis vector.
  SparseVec apply(const SparseVec& x) const;

 private:
  std::shared_ptr<const BasisSystem> basis_;
  OperatorKind kind_;
};

enum class PowerMethod {
  Auto,
  Iterate,  // k column applications
  Orbit     // rewrite in the orbit system, shift by k, expand back
};

/// op^k x for an f-basis vector. Auto iterates for k <= 256, else jumps along the orbit.
SparseVec apply_power(const ColumnMap& op, const SparseVec& x, const Int& k, PowerMethod method = PowerMethod::Auto);

struct ConjugationReport {
  Int lo, hi;
  long checked = 0;
  long mismatch_count = 0;
  std::vector<Int> mismatches;  // first few
  bool passed() const { return mismatch_count == 0; }
};

ConjugationReport verify_conjugation(const BasisSystem& basis, const Int& lo, const Int& hi);

struct ColumnNorm {
  Int i;
  Magnitude norm;
};

struct ColumnNormReport {
  Int lo, hi;
  std::vector<ColumnNorm> columns;
  Magnitude max;
  Int argmax;
  /// Columns whose norm is within 2^-150 (relative) of the maximum.
  std::vector<Int> near_max;
  bool bound_ok = false;  // max <= 2
};

ColumnNormReport column_norms(const Schedule& s, const Int& lo, const Int& hi,
                              int precision_bits = kDefaultPrecisionBits);

struct RowEntry {
  Int i;
  long generation = 0;
  ScalarSum coefficient;
  Magnitude magnitude;
};

struct GenerationMax {
  long generation = 0;
  Int argmax;
  Magnitude max;
};

struct RowReport {
  Int row;
  Int lo, hi;
  std::vector<RowEntry> entries;
  std::vector<GenerationMax> per_generation;
  /// Per-generation maxima strictly decrease (vacuous with fewer than two generations).
  bool decreasing = true;
  /// Smallest log2 ratio between consecutive generation maxima; empty with < 2 generations.
  std::optional<Real> min_log2_drop;
};

RowReport row_entries(const Schedule& s, const Int& row, const Int& lo, const Int& hi,
                      int precision_bits = kDefaultPrecisionBits);

}  // namespace readop
