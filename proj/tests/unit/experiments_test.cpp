#include "readop/experiments.hpp"

#include "reference.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace readop {
namespace {

std::shared_ptr<const Schedule> fixture_ptr() {
  static const auto s = std::make_shared<const Schedule>(Schedule::fixture());
  return s;
}

std::shared_ptr<const BasisSystem> basis_ptr() {
  static const auto b = std::make_shared<const BasisSystem>(fixture_ptr());
  return b;
}

const std::vector<NonAdjointRow>& rows() {
  static const auto r = nonadjoint_rows(basis_ptr(), 1, 3);
  return r;
}

TEST(NonAdjoint, Rows) {
  ASSERT_EQ(rows().size(), 2u);
  for (const auto& row : rows()) {
    EXPECT_EQ(row.s, 1);
    EXPECT_TRUE(row.identity_ok);
    EXPECT_TRUE(row.orbit_agrees);
    EXPECT_EQ(row.limit_norm, 4);
    EXPECT_DOUBLE_EQ(row.f_norm.approx(), 1.0);
    EXPECT_GT(Magnitude::from_real(Real::from_int(row.limit_norm, 200)), row.f_norm);
  }
  EXPECT_EQ(rows()[0].n, 2);
  EXPECT_EQ(rows()[0].f_index, 900);
  EXPECT_EQ(rows()[1].f_index, 2 * pow2(30));
  EXPECT_LT(rows()[1].delta, rows()[0].delta);
}

TEST(NonAdjoint, DeltaValues) {
  const NonAdjointRow& r2 = rows()[0];
  EXPECT_EQ(r2.analytic, DyadicScalar(Rational(4), Rational(-121, 30)));
  EXPECT_NEAR(r2.delta.approx(), 0.24429, 1e-5);
  const Real exact3 = Real::from_rational(Rational(2) + Rational(329 - (1L << 29), 1L << 15), 200);
  EXPECT_TRUE(abs(rows()[1].delta.log2() - exact3) <= Real::pow2(-150, 200));
  EXPECT_NEAR(rows()[1].delta.log2().to_double(), 329.0 / 32768 - 16384, 1e-3 * 16384);
}

TEST(NonAdjoint, ResidualMatchesReferenceModel) {
  // T^(v_1 + 1) f_(a_2) + a_1 e_(v_1 + 1) rebuilt from the reference columns.
  ref::Model model(ref::fixture(3));
  ref::Vec y;
  y[Int(900)] = ScalarSum(1);
  for (int k = 0; k < 329; ++k) {
    ref::Vec next;
    for (const auto& [i, c] : y) {
      for (const auto& [j, d] : model.t_column(i)) ref::add_to(next, j, c * d);
    }
    y = next;
  }
  for (const auto& [j, c] : model.e_in_f(Int(329))) ref::add_to(y, j, c * ScalarSum(4));
  EXPECT_EQ(rows()[0].residual.entries(), y);
  EXPECT_EQ(y, ref::scaled(model.e_in_f(Int(1229)), ScalarSum(4)));
}

TEST(NonAdjoint, Report) {
  const Report rep = nonadjoint_report(basis_ptr(), 1, 3);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
  ASSERT_EQ(rep.tables.size(), 1u);
  EXPECT_EQ(rep.tables[0].header[0], "s");
  EXPECT_EQ(rep.tables[0].rows.size(), 2u);
  EXPECT_GE(rep.notes.size(), 2u);
}

class Suites : public ::testing::Test {
 protected:
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "readop_suite_test";
  void SetUp() override { std::filesystem::remove_all(dir); }
  void TearDown() override { std::filesystem::remove_all(dir); }

  SuiteConfig config(std::shared_ptr<const Schedule> s, const std::string& source) const {
    SuiteConfig c;
    c.schedule = std::move(s);
    c.schedule_source = source;
    c.out_dir = dir;
    return c;
  }
};

TEST_F(Suites, UnknownName) {
  EXPECT_THROW(run_suite("unknown", config(fixture_ptr(), "fixture")), std::invalid_argument);
  EXPECT_THROW(build_suite("unknown", config(fixture_ptr(), "fixture")), std::invalid_argument);
}

TEST_F(Suites, NaiveNormsFail) {
  const auto naive = std::make_shared<const Schedule>(Schedule::naive());
  EXPECT_NE(run_suite("norms", config(naive, "naive")), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "norms" / "report.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "norms" / "column_norms.csv"));
}

TEST_F(Suites, FixtureNormsPass) {
  SuiteConfig c = config(fixture_ptr(), "fixture");
  c.upto = Int(2000);
  EXPECT_EQ(run_suite("norms", c), 0);
}

TEST_F(Suites, NonAdjointBundle) {
  EXPECT_EQ(run_suite("nonadjoint", config(fixture_ptr(), "fixture")), 0);
  for (const char* f : {"report.txt", "checks.csv", "delta.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "nonadjoint" / f)) << f;
  }
}

TEST_F(Suites, ConjugationReportHeader) {
  SuiteConfig c = config(fixture_ptr(), "fixture");
  c.upto = Int(500);
  const Report rep = build_suite("conjugation", c);
  EXPECT_TRUE(rep.passed());
  bool has_fp = false;
  for (const auto& [k, v] : rep.config) has_fp |= k == "schedule_fingerprint" && v == fixture_ptr()->fingerprint();
  EXPECT_TRUE(has_fp);
}

TEST_F(Suites, RowsSuiteReportsDecrease) {
  SuiteConfig c = config(fixture_ptr(), "fixture");
  const Report rep = build_suite("rows", c);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

}  // namespace
}  // namespace readop
