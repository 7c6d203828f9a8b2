#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "parabctl/grid.hpp"
#include "support/fields.hpp"

namespace parabctl {
namespace {

constexpr double pi = std::numbers::pi;

// Trapezoid rule on a much finer grid, independent of the Simpson code.
template <typename F>
double trapezoid(F f, int panels = 200000) {
  const double h = 1.0 / panels;
  double s = 0.5 * (f(0.0) + f(1.0));
  for (int k = 1; k < panels; ++k) s += f(k * h);
  return s * h;
}

TEST(GridFunction, RejectsEvenOrTinyNodeCounts) {
  EXPECT_THROW(GridFunction(std::vector<double>(4, 0.0)), InvalidParameter);
  EXPECT_THROW(GridFunction(std::vector<double>(1, 0.0)), InvalidParameter);
  EXPECT_NO_THROW(GridFunction(std::vector<double>(3, 0.0)));
}

TEST(GridFunction, SampleAndSpacing) {
  const auto f = GridFunction::sample(11, [](double x) { return 2.0 * x; });
  EXPECT_DOUBLE_EQ(f.h(), 0.1);
  EXPECT_DOUBLE_EQ(f.x(10), 1.0);
  EXPECT_DOUBLE_EQ(f.back(), 2.0);
  EXPECT_TRUE(f.all_finite());
  const GridFunction g(std::vector<double>{0.0, NAN, 1.0});
  EXPECT_FALSE(g.all_finite());
}

TEST(NormL2, ZeroField) { EXPECT_EQ(norm_l2(GridFunction::zeros(101)), 0.0); }

TEST(NormL2, ConstantIsExact) {
  EXPECT_NEAR(norm_l2(GridFunction::sample(101, [](double) { return 1.0; })), 1.0, 1e-15);
}

TEST(NormL2, LinearIsExact) {
  EXPECT_NEAR(norm_l2(GridFunction::sample(101, [](double x) { return x; })), 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(NormL2, ExactForDegreeOnePolynomials) {
  for (std::size_t n : {3u, 11u, 51u, 201u}) {
    const auto f = GridFunction::sample(n, [](double x) { return 3.0 - 2.0 * x; });
    const double exact = std::sqrt(13.0 / 3.0);  // int (3-2x)^2 = 9 - 6 + 4/3
    EXPECT_NEAR(norm_l2(f), exact, 1e-12 * exact) << n;
  }
}

TEST(NormL2, MatchesTrapezoidOracle) {
  auto f = [](double x) { return std::exp(-x) * std::sin(3.0 * x) + 0.2; };
  const double oracle = std::sqrt(trapezoid([&](double x) { return f(x) * f(x); }));
  EXPECT_NEAR(norm_l2(GridFunction::sample(201, f)), oracle, 1e-8);
}

TEST(Norms, ZeroField) {
  const auto z = GridFunction::zeros(51);
  EXPECT_EQ(norm_h1(z), 0.0);
  EXPECT_EQ(norm_h2(z), 0.0);
  EXPECT_EQ(norm_max(z), 0.0);
  EXPECT_EQ(norm_c1(z), 0.0);
}

TEST(Norms, ConstantField) {
  const auto c = GridFunction::sample(51, [](double) { return -0.7; });
  EXPECT_NEAR(norm_h1(c), 0.7, 1e-14);
  EXPECT_NEAR(norm_max(c), 0.7, 1e-15);
  EXPECT_NEAR(norm_c1(c), 0.7, 1e-12);
}

TEST(Norms, SineH1ClosedForm) {
  const auto f = GridFunction::sample(201, [](double x) { return std::sin(pi * x); });
  EXPECT_NEAR(norm_h1(f), std::sqrt(0.5 + pi * pi / 2.0), 1e-3);
}

TEST(Norms, H1SquaredIsL2PlusDerivative) {
  const auto f = GridFunction::sample(101, [](double x) { return std::cos(2.0 * x) + x * x; });
  const double l2 = norm_l2(f);
  const double h1 = norm_h1(f);
  EXPECT_NEAR(h1 * h1, l2 * l2 + dx_l2_squared(f), 1e-14);
}

TEST(Derivatives, ExactForQuadratics) {
  const auto f = GridFunction::sample(21, [](double x) { return 1.0 + 2.0 * x - 3.0 * x * x; });
  const auto d1 = first_derivative(f);
  const auto d2 = second_derivative(f);
  for (std::size_t j = 0; j < f.size(); ++j) {
    EXPECT_NEAR(d1[j], 2.0 - 6.0 * f.x(j), 1e-11) << j;
    EXPECT_NEAR(d2[j], -6.0, 1e-9) << j;
  }
}

TEST(Derivatives, SecondOrderConvergenceAtEnds) {
  auto err = [](std::size_t n) {
    const auto f = GridFunction::sample(n, [](double x) { return std::exp(x); });
    const auto d = first_derivative(f);
    return std::max(std::abs(d.front() - 1.0), std::abs(d.back() - std::exp(1.0)));
  };
  EXPECT_NEAR(std::log2(err(51) / err(101)), 2.0, 0.1);
}

TEST(Agmon, Examples) {
  auto one = check_agmon(GridFunction::sample(101, [](double) { return 1.0; }));
  EXPECT_NEAR(one.lhs, 1.0, 1e-15);
  EXPECT_NEAR(one.rhs, 1.0, 1e-12);
  EXPECT_TRUE(one.pass);

  auto zero = check_agmon(GridFunction::zeros(101));
  EXPECT_EQ(zero.lhs, 0.0);
  EXPECT_EQ(zero.rhs, 0.0);
  EXPECT_TRUE(zero.pass);

  auto lin = check_agmon(GridFunction::sample(201, [](double x) { return x; }));
  EXPECT_NEAR(lin.lhs, 1.0, 1e-15);
  EXPECT_NEAR(lin.rhs, 1.0 / 3.0 + 2.0 / std::sqrt(3.0), 1e-10);
  EXPECT_TRUE(lin.pass);
}

TEST(Poincare, Examples) {
  const auto one = GridFunction::sample(101, [](double) { return 1.0; });
  for (auto l : {Endpoint::left, Endpoint::right}) {
    auto r = check_poincare(one, l);
    EXPECT_NEAR(r.lhs, -2.0, 1e-15);
    EXPECT_NEAR(r.rhs, -1.0, 1e-12);
    EXPECT_TRUE(r.pass);
  }
  auto zero = check_poincare(GridFunction::zeros(101), Endpoint::left);
  EXPECT_EQ(zero.lhs, 0.0);
  EXPECT_TRUE(zero.pass);

  auto lin = check_poincare(GridFunction::sample(201, [](double x) { return x; }), Endpoint::left);
  EXPECT_EQ(lin.lhs, 0.0);
  EXPECT_NEAR(lin.rhs, 11.0 / 3.0, 1e-10);
  EXPECT_TRUE(lin.pass);
}

TEST(Inequalities, ToleranceIsTenHSquared) {
  const auto f = GridFunction::zeros(11);
  EXPECT_DOUBLE_EQ(discretization_tolerance(f), 10.0 * 0.01);
}

TEST(Inequalities, FieldFamilyPassesAtAllResolutions) {
  for (const auto& field : testing::smooth_fields()) {
    for (std::size_t n : {51u, 101u, 201u}) {
      const auto f = GridFunction::sample(n, field.f);
      EXPECT_TRUE(check_agmon(f).pass) << field.name << " N=" << n;
      EXPECT_TRUE(check_poincare(f, Endpoint::left).pass) << field.name << " N=" << n;
      EXPECT_TRUE(check_poincare(f, Endpoint::right).pass) << field.name << " N=" << n;
    }
  }
}

TEST(Inequalities, ViolationsShrinkWithTheGrid) {
  // A deliberately broken inequality: lhs = |f|_inf^2 against rhs = |f|^2
  // alone fails by a fixed amount, and the discrete value converges at O(h^2).
  for (const auto& field : testing::smooth_fields()) {
    double slack[3];
    int k = 0;
    for (std::size_t n : {51u, 101u, 201u}) {
      const auto r = check_agmon(GridFunction::sample(n, field.f));
      slack[k++] = r.rhs - r.lhs;
    }
    const double d1 = std::abs(slack[0] - slack[2]);
    const double d2 = std::abs(slack[1] - slack[2]);
    if (d2 < 1e-10) continue;  // exact on the grid
    EXPECT_GT(d1 / d2, 3.0) << field.name;
  }
}

}  // namespace
}  // namespace parabctl
