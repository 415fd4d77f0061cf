#include "readop/lad.hpp"
#include "readop/basis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <optional>
#include <random>

namespace readop {
namespace {

using Matrix = std::vector<std::vector<Rational>>;

/// Solves the square system exactly; empty when singular.
std::optional<std::vector<Rational>> solve_exact(Matrix m, std::vector<Rational> rhs) {
  const std::size_t n = m.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(m[p], m[c]);
    std::swap(rhs[p], rhs[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t c = 0; c < n; ++c) x[c] = rhs[c] / m[c][c];
  return x;
}

std::size_t rank_of(Matrix m) {
  std::size_t rank = 0;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t p = rank;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[rank]);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      const Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

Rational objective(const Matrix& a, const std::vector<Rational>& t, const std::vector<Rational>& g) {
  Rational total = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    Rational res = t[k];
    for (std::size_t j = 0; j < g.size(); ++j) res -= a[k][j] * g[j];
    total += abs(res);
  }
  return total;
}

/// Exact LAD optimum by enumerating the vertices where n residuals vanish.
/// Requires full column rank.
Rational vertex_oracle(const Matrix& a, const std::vector<Rational>& t) {
  const std::size_t m = t.size();
  const std::size_t n = a.empty() ? 0 : a[0].size();
  if (n == 0) return objective(a, t, {});
  std::optional<Rational> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) {
    if (depth == n) {
      Matrix sub(n, std::vector<Rational>(n));
      std::vector<Rational> rhs(n);
      for (std::size_t r = 0; r < n; ++r) {
        sub[r] = a[pick[r]];
        rhs[r] = t[pick[r]];
      }
      if (auto g = solve_exact(sub, rhs)) {
        const Rational v = objective(a, t, *g);
        if (!best || v < *best) best = v;
      }
      return;
    }
    for (std::size_t k = from; k < m; ++k) {
      pick[depth] = k;
      rec(depth + 1, k + 1);
    }
  };
  rec(0, 0);
  return *best;
}

struct Instance {
  Matrix a;  // coordinates x family
  std::vector<Rational> t;
  LadProblem problem;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coords(1, 6), fam(0, 4), num(-9, 9), den(1, 5), coin(0, 2);
  Instance in;
  const int m = coords(rng);
  const int n = std::min(fam(rng), m);
  in.a.assign(m, std::vector<Rational>(n));
  in.t.assign(m, Rational(0));
  for (int k = 0; k < m; ++k) {
    in.t[k] = coin(rng) ? Rational(num(rng), den(rng)) : Rational(0);
    in.t[k].canonicalize();
    for (int j = 0; j < n; ++j) {
      in.a[k][j] = coin(rng) ? Rational(num(rng), den(rng)) : Rational(0);
      in.a[k][j].canonicalize();
    }
  }
  in.problem.target = SparseVec(BasisTag::F);
  for (int k = 0; k < m; ++k) {
    if (in.t[k] != 0) in.problem.target.add(Int(k), ScalarSum(in.t[k]));
  }
  for (int j = 0; j < n; ++j) {
    SparseVec v(BasisTag::F);
    for (int k = 0; k < m; ++k) {
      if (in.a[k][j] != 0) v.add(Int(k), ScalarSum(in.a[k][j]));
    }
    in.problem.family.push_back(v);
  }
  return in;
}

bool usable(const Instance& in) {
  for (const auto& v : in.problem.family) {
    if (v.is_zero()) return false;
  }
  return in.a.empty() || in.a[0].empty() || rank_of(in.a) == in.a[0].size();
}

bool near(const Magnitude& got, const Rational& exact, long bits) {
  const Real g = got.is_zero() ? Real(200) : *got.to_real(200);
  const Real e = Real::from_rational(exact, 200);
  Real scale = abs(e);
  if (scale < Real::from_long(1, 200)) scale = Real::from_long(1, 200);
  return abs(g - e) <= scale * Real::pow2(-bits, 200);
}

TEST(Lad, Trivial) {
  LadProblem p;
  p.target = SparseVec::unit(BasisTag::F, Int(0));
  const auto empty = solve_lad(p);
  EXPECT_TRUE(empty.certified);
  EXPECT_TRUE(empty.coefficients.empty());
  EXPECT_TRUE(near(empty.value, Rational(1), 150));
  p.family.push_back(SparseVec::unit(BasisTag::F, Int(0)));
  const auto in_span = solve_lad(p);
  EXPECT_TRUE(in_span.certified);
  ASSERT_EQ(in_span.coefficients.size(), 1u);
  EXPECT_TRUE(abs(in_span.coefficients[0] - Real::from_long(1, 200)) <= Real::pow2(-150, 200));
  EXPECT_TRUE(near(in_span.value, Rational(0), 150));
}

TEST(Lad, MatchesVertexEnumeration) {
  std::mt19937_64 rng(2024);
  int solved = 0;
  while (solved < 300) {
    const Instance in = random_instance(rng);
    if (!usable(in)) continue;
    const LadSolution sol = solve_lad(in.problem);
    const Rational exact = vertex_oracle(in.a, in.t);
    ASSERT_TRUE(sol.certified);
    ASSERT_TRUE(near(sol.value, exact, 100)) << sol.value.to_string() << " vs " << exact.get_str();
    // The reported value is the residual norm of the reported coefficients.
    Real resid(200);
    for (std::size_t k = 0; k < in.t.size(); ++k) {
      Real r = Real::from_rational(in.t[k], 200);
      for (std::size_t j = 0; j < sol.coefficients.size(); ++j) {
        r -= Real::from_rational(in.a[k][j], 200) * sol.coefficients[j];
      }
      resid += abs(r);
    }
    const Real got = sol.value.is_zero() ? Real(200) : *sol.value.to_real(200);
    ASSERT_TRUE(abs(got - resid) <= Real::pow2(-100, 200));
    ++solved;
  }
}

TEST(Lad, MonotoneInFamily) {
  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 100) {
    const Instance in = random_instance(rng);
    if (!usable(in) || in.problem.family.size() < 2) continue;
    LadProblem smaller = in.problem;
    smaller.family.pop_back();
    const Real big = solve_lad(in.problem).primal_objective;
    const Real small = solve_lad(smaller).primal_objective;
    ASSERT_TRUE(big <= small + Real::pow2(-150, 200));
    ++checked;
  }
}

TEST(Lad, ScaleEquivariant) {
  std::mt19937_64 rng(7);
  int checked = 0;
  while (checked < 100) {
    const Instance in = random_instance(rng);
    if (!usable(in)) continue;
    LadProblem scaled = in.problem;
    const Rational lambda(7, 3);
    scaled.target *= ScalarSum(lambda);
    const Real base = solve_lad(in.problem).primal_objective;
    const Real got = solve_lad(scaled).primal_objective;
    ASSERT_TRUE(abs(got - base * Real::from_rational(lambda, 200)) <= Real::pow2(-150, 200));
    ++checked;
  }
}

TEST(Lad, IrrationalCoefficients) {
  // One member with an irrational entry: min over g of |1 - g| + |g| 2^(1/3) is 1, at g = 0.
  LadProblem p;
  p.target = SparseVec::unit(BasisTag::F, Int(0));
  SparseVec v(BasisTag::F);
  v.add(Int(0), ScalarSum(1));
  v.add(Int(1), ScalarSum(DyadicScalar::pow2(Rational(1, 3))));
  p.family.push_back(v);
  const auto sol = solve_lad(p);
  EXPECT_TRUE(sol.certified);
  EXPECT_TRUE(near(sol.value, Rational(1), 150));
  EXPECT_TRUE(sol.duality_gap <= Real::pow2(-100, 200));
}

TEST(Lad, EHatSubfamilyAgainstOracleAndGrid) {
  const BasisSystem basis(std::make_shared<const Schedule>(Schedule::fixture()));
  LadProblem p;
  p.target = SparseVec::unit(BasisTag::F, Int(0));
  for (long j : {900L, 1228L, 1800L}) p.family.push_back(basis.ehat_in_f(Int(j)));
  // All three expansions have rational coefficients; build the dense matrix.
  std::vector<Int> coords;
  for (const auto& v : p.family) {
    for (const auto& [i, c] : v.entries()) coords.push_back(i);
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  Matrix a(coords.size(), std::vector<Rational>(3));
  std::vector<Rational> t(coords.size(), Rational(0));
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] == 0) t[k] = 1;
    for (std::size_t j = 0; j < 3; ++j) a[k][j] = p.family[j].coefficient(coords[k]).as_monomial()->to_rational();
  }
  const Rational exact = vertex_oracle(a, t);
  const LadSolution sol = solve_lad(p);
  EXPECT_TRUE(sol.certified);
  EXPECT_TRUE(near(sol.value, exact, 100));
  Rational grid_best = objective(a, t, {0, 0, 0});
  for (int x = -16; x <= 16; ++x) {
    for (int y = -16; y <= 16; ++y) {
      for (int z = -16; z <= 16; ++z) {
        const Rational v = objective(a, t, {Rational(x, 8), Rational(y, 8), Rational(z, 8)});
        if (v < grid_best) grid_best = v;
      }
    }
  }
  EXPECT_LE(exact, grid_best);
  EXPECT_TRUE(near(sol.value, grid_best, 100));
  EXPECT_GT(exact, 0);
}

TEST(Lad, LowerBoundDistance) {
  const SparseVec e0 = SparseVec::unit(BasisTag::F, Int(0));
  const SparseVec away = SparseVec::unit(BasisTag::F, Int(5), ScalarSum(3));
  EXPECT_GE(lower_bound_distance(away, e0).approx(), 1.0);
  EXPECT_TRUE(lower_bound_distance(e0, e0).is_zero());
  const SparseVec half = SparseVec::unit(BasisTag::F, Int(0), ScalarSum(Rational(1, 2)));
  EXPECT_DOUBLE_EQ(lower_bound_distance(half, e0).approx(), 0.5);
  EXPECT_DOUBLE_EQ(distance(away, e0).approx(), 4.0);
  EXPECT_LE(lower_bound_distance(away + half, e0), distance(away + half, e0));
}

}  // namespace
}  // namespace readop
