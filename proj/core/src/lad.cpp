#include "readop/lad.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace readop {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;

  std::size_t add() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Family members connected to the target through shared coordinates.
std::vector<std::size_t> presolve(const LadProblem& p) {
  DisjointSets sets;
  std::map<Int, std::size_t> id;
  auto node = [&](const Int& i) {
    auto [it, inserted] = id.try_emplace(i, 0);
    if (inserted) it->second = sets.add();
    return it->second;
  };
  const std::size_t anchor = sets.add();
  for (const auto& [i, c] : p.target.entries()) sets.join(node(i), anchor);
  for (const auto& v : p.family) {
    const std::size_t first = node(v.min_index());
    for (const auto& [i, c] : v.entries()) sets.join(node(i), first);
  }
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < p.family.size(); ++j) {
    if (sets.find(id.at(p.family[j].min_index())) == sets.find(anchor)) kept.push_back(j);
  }
  return kept;
}

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols, mpfr_prec_t prec)
      : rows_(rows), cols_(cols), cells_(rows * (cols + 1), Real(prec)), cost_(cols + 1, Real(prec)), factor_(prec), scratch_(prec) {}

  Real& at(std::size_t r, std::size_t c) { return cells_[r * (cols_ + 1) + c]; }
  Real& rhs(std::size_t r) { return at(r, cols_); }
  Real& cost(std::size_t c) { return cost_[c]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const Real inv = Real::from_long(1, at(pr, pc).precision()) / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) {
      if (!at(pr, c).is_zero()) at(pr, c) *= inv;
    }
    at(pr, pc) = Real::from_long(1, inv.precision());
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr || at(r, pc).is_zero()) continue;
      eliminate(&at(r, 0), pr, pc);
    }
    if (!cost_[pc].is_zero()) eliminate(cost_.data(), pr, pc);
  }

 private:
  // In place: row -= row[pc] * pivot_row, without temporaries.
  void eliminate(Real* row, std::size_t pr, std::size_t pc) {
    mpfr_set(factor_.get(), row[pc].get(), MPFR_RNDN);
    for (std::size_t c = 0; c <= cols_; ++c) {
      const Real& p = at(pr, c);
      if (p.is_zero()) continue;
      mpfr_mul(scratch_.get(), factor_.get(), p.get(), MPFR_RNDN);
      mpfr_sub(row[c].get(), row[c].get(), scratch_.get(), MPFR_RNDN);
    }
    mpfr_set_zero(row[pc].get(), 1);
  }

  std::size_t rows_, cols_;
  std::vector<Real> cells_;
  std::vector<Real> cost_;
  Real factor_;
  Real scratch_;
};

}  // namespace

LadSolution solve_lad(const LadProblem& problem, int precision_bits) {
  if (problem.target.tag() != BasisTag::F) throw std::invalid_argument("LAD target must be in the f-basis");
  for (const auto& v : problem.family) {
    if (v.tag() != BasisTag::F) throw std::invalid_argument("LAD family must be in the f-basis");
    if (v.is_zero()) throw std::invalid_argument("LAD family member is zero");
  }
  const mpfr_prec_t prec = precision_bits + 32;
  LadSolution sol;
  sol.active = presolve(problem);
  sol.coefficients.assign(problem.family.size(), Real(precision_bits));

  std::map<Int, std::size_t> row_of;
  for (const auto& [i, c] : problem.target.entries()) row_of.try_emplace(i, 0);
  for (std::size_t j : sol.active) {
    for (const auto& [i, c] : problem.family[j].entries()) row_of.try_emplace(i, 0);
  }
  std::size_t m = 0;
  for (auto& [i, r] : row_of) {
    r = m++;
    sol.coordinates.push_back(i);
  }
  const std::size_t p = sol.active.size();

  // Dense data.
  std::vector<Real> t(m, Real(prec));
  for (const auto& [i, c] : problem.target.entries()) t[row_of.at(i)] = c.to_real(prec);
  std::vector<std::vector<Real>> A(m, std::vector<Real>(p, Real(prec)));
  for (std::size_t j = 0; j < p; ++j) {
    for (const auto& [i, c] : problem.family[sol.active[j]].entries()) A[row_of.at(i)][j] = c.to_real(prec);
  }

  // Columns: gamma+ [0,p), gamma- [p,2p), s+ [2p,2p+m), s- [2p+m,2p+2m).
  const std::size_t cols = 2 * p + 2 * m;
  Tableau tab(m, cols, prec);
  std::vector<std::size_t> basis(m);
  std::vector<int> sigma(m, 1);
  for (std::size_t k = 0; k < m; ++k) {
    sigma[k] = t[k].sign() < 0 ? -1 : 1;
    const Real s = Real::from_long(sigma[k], prec);
    for (std::size_t j = 0; j < p; ++j) {
      tab.at(k, j) = A[k][j] * s;
      tab.at(k, p + j) = -(A[k][j] * s);
    }
    tab.at(k, 2 * p + k) = s;
    tab.at(k, 2 * p + m + k) = -s;
    tab.rhs(k) = t[k] * s;
    basis[k] = sigma[k] > 0 ? 2 * p + k : 2 * p + m + k;
  }
  for (std::size_t c = 2 * p; c < cols; ++c) tab.cost(c) = Real::from_long(1, prec);
  // Price out the initial (unit) basis.
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t c = 0; c <= cols; ++c) tab.cost(c) -= tab.at(k, c);
  }

  const Real eps = Real::pow2(-(precision_bits * 3) / 4, 64);
  const long max_pivots = 50 * static_cast<long>(cols + m + 1);
  while (true) {
    std::size_t enter = cols;
    for (std::size_t c = 0; c < cols; ++c) {
      if (tab.cost(c) < -eps) {
        enter = c;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = m;
    Real best(prec);
    for (std::size_t k = 0; k < m; ++k) {
      if (!(tab.at(k, enter) > eps)) continue;
      Real ratio = tab.rhs(k) / tab.at(k, enter);
      if (leave == m || ratio < best - eps || (abs(ratio - best) <= eps && basis[k] < basis[leave])) {
        leave = k;
        best = ratio;
      }
    }
    if (leave == m) throw std::runtime_error("LAD linear program reported unbounded");
    tab.pivot(leave, enter);
    basis[leave] = enter;
    if (++sol.pivots > max_pivots) throw LadPrecisionError("simplex did not terminate within the pivot budget");
  }

  std::vector<Real> x(cols, Real(prec));
  for (std::size_t k = 0; k < m; ++k) x[basis[k]] = tab.rhs(k);
  for (std::size_t j = 0; j < p; ++j) sol.coefficients[sol.active[j]] = (x[j] - x[p + j]).with_precision(precision_bits);

  // Duals from the reduced costs of s+ columns.
  sol.dual.reserve(m);
  for (std::size_t k = 0; k < m; ++k) sol.dual.push_back(Real::from_long(1, prec) - tab.cost(2 * p + k));

  Real primal(prec);
  for (std::size_t k = 0; k < m; ++k) {
    Real res = t[k];
    for (std::size_t j = 0; j < p; ++j) res -= A[k][j] * (x[j] - x[p + j]);
    primal += abs(res);
  }
  Real dual(prec);
  Real infeas(prec);
  for (std::size_t k = 0; k < m; ++k) {
    dual += t[k] * sol.dual[k];
    Real over = abs(sol.dual[k]) - Real::from_long(1, prec);
    if (over > infeas) infeas = over;
  }
  for (std::size_t j = 0; j < p; ++j) {
    Real col(prec);
    for (std::size_t k = 0; k < m; ++k) col += A[k][j] * sol.dual[k];
    col = abs(col);
    if (col > infeas) infeas = col;
  }
  sol.primal_objective = primal.with_precision(precision_bits);
  sol.dual_objective = dual.with_precision(precision_bits);
  sol.duality_gap = (primal - dual).with_precision(precision_bits);
  sol.dual_infeasibility = infeas.with_precision(precision_bits);
  sol.value = Magnitude::from_real(primal.with_precision(precision_bits));
  const Real tol = Real::pow2(-precision_bits / 2, 64);
  sol.certified = abs(sol.duality_gap) <= tol && sol.dual_infeasibility <= tol;
  if (!sol.certified) {
    throw LadPrecisionError("duality gap " + sol.duality_gap.to_string(6) + " not closed at " +
                            std::to_string(precision_bits) + " bits");
  }
  return sol;
}

Magnitude lower_bound_distance(const SparseVec& x, const SparseVec& target, int precision_bits) {
  if (x.tag() != BasisTag::F || target.tag() != BasisTag::F) {
    throw std::invalid_argument("distance bounds need f-basis vectors");
  }
  Magnitude total;
  for (const auto& [i, c] : target.entries()) total += (c - x.coefficient(i)).magnitude(precision_bits);
  return total;
}

Magnitude distance(const SparseVec& x, const SparseVec& target, int precision_bits) {
  return norm_l1(target - x, precision_bits);
}

}  // namespace readop
