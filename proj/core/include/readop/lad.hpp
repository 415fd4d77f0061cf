#pragma once

// Least-absolute-deviations distance from a target to the span of a finite
// family, by primal simplex on the standard LP with a duality certificate.

#include "readop/basis.hpp"

#include <cstddef>
#include <vector>

namespace readop {

struct LadProblem {
  std::vector<SparseVec> family;  // f-basis, nonzero
  SparseVec target{BasisTag::F};
};

struct LadSolution {
  /// One coefficient per family member (zero for members removed by presolve).
  std::vector<Real> coefficients;
  /// Residual l1 norm recomputed from the coefficients.
  Magnitude value;
  Real primal_objective;
  Real dual_objective;
  /// Dual multiplier per coordinate, |y_k| <= 1 at optimality.
  std::vector<Int> coordinates;
  std::vector<Real> dual;
  Real duality_gap;          // primal - dual, absolute
  Real dual_infeasibility;   // max |A^T y| and max(|y| - 1, 0)
  long pivots = 0;
  std::vector<std::size_t> active;  // family members kept by presolve
  bool certified = false;
};

/// Thrown when the simplex cannot close the duality gap at the requested precision.
class LadPrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// min over gamma of ||target - sum gamma_j family_j||_1. Members whose support is
/// not connected (through shared coordinates) to the target's support are fixed at
/// zero, which is exact. Bland's rule makes the pivot sequence deterministic.
LadSolution solve_lad(const LadProblem& problem, int precision_bits = kDefaultPrecisionBits);

/// Residual mass of target - x on the target's support: a lower bound for ||target - x||_1.
Magnitude lower_bound_distance(const SparseVec& x, const SparseVec& target,
                               int precision_bits = kDefaultPrecisionBits);

/// ||target - x||_1 exactly evaluated at the given precision.
Magnitude distance(const SparseVec& x, const SparseVec& target, int precision_bits = kDefaultPrecisionBits);

}  // namespace readop
