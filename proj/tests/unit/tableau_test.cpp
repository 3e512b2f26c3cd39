#include <gtest/gtest.h>

#include "efrk/tableau.hpp"

namespace {

using namespace efrk;

TEST(Tableau, ThirdOrderCoefficients) {
  const ButcherTableau t = builtin_tableau("RK33");
  EXPECT_EQ(t.stages(), 3);
  EXPECT_EQ(t.order(), 3);
  EXPECT_EQ(t.c(0), 0.0);
  EXPECT_NEAR(t.c(1), 1.0 / 3.0, 1e-16);
  EXPECT_NEAR(t.c(2), 2.0 / 3.0, 1e-16);
  EXPECT_NEAR(t.c(3), 1.0, 1e-16);
  EXPECT_NEAR(t.a(1, 0), 1.0 / 3.0, 1e-16);
  EXPECT_EQ(t.a(2, 0), 0.0);
  EXPECT_NEAR(t.a(2, 1), 2.0 / 3.0, 1e-16);
  EXPECT_EQ(t.b(0), 0.25);
  EXPECT_EQ(t.b(1), 0.0);
  EXPECT_EQ(t.b(2), 0.75);
  const double btc = t.b(0) * t.c(0) + t.b(1) * t.c(1) + t.b(2) * t.c(2);
  EXPECT_NEAR(btc, 0.5, 1e-16);
}

TEST(Tableau, ForwardEulerAndHeun) {
  const ButcherTableau e = builtin_tableau("RK11");
  EXPECT_EQ(e.stages(), 1);
  EXPECT_EQ(e.b(0), 1.0);
  EXPECT_EQ(e.c(0), 0.0);
  EXPECT_EQ(e.c(1), 1.0);
  const ButcherTableau h = builtin_tableau("RK22");
  EXPECT_EQ(h.a(1, 0), 1.0);
  EXPECT_EQ(h.b(0), 0.5);
  EXPECT_EQ(h.b(1), 0.5);
}

TEST(Tableau, AbscissaeAreRowSums) {
  for (const char* name : {"RK11", "RK22", "RK33"}) {
    const ButcherTableau t = builtin_tableau(name);
    for (int i = 1; i <= t.stages(); ++i) {
      double sum = 0.0;
      for (int j = 0; j < i; ++j) sum += t.a(i, j);
      EXPECT_NEAR(t.c(i), sum, 1e-14);
    }
    EXPECT_NEAR(t.c(t.stages()), 1.0, 1e-14);
  }
}

TEST(Tableau, RejectsMalformedInput) {
  EXPECT_THROW(builtin_tableau("RK44"), ValidationError);
  EXPECT_THROW(ButcherTableau("bad", 1, {{0.5}}), ValidationError);
  EXPECT_THROW(ButcherTableau("bad", 1, {{1.0, 0.0}}), ValidationError);
  EXPECT_THROW(ButcherTableau("bad", 1, {}), ValidationError);
}

TEST(OrderConditions, BuiltinsPassAtDeclaredOrder) {
  for (const char* name : {"RK11", "RK22", "RK33"}) {
    const ButcherTableau t = builtin_tableau(name);
    const auto rep = check_order_conditions(t, t.order());
    EXPECT_TRUE(rep.passed()) << name;
    EXPECT_LE(rep.max_residual(), 1e-14) << name;
  }
  EXPECT_LE(check_order_conditions(builtin_tableau("RK33"), 3).max_residual(), 1e-15);
}

TEST(OrderConditions, ForwardEulerIsNotSecondOrder) {
  const auto rep = check_order_conditions(builtin_tableau("RK11"), 2);
  EXPECT_FALSE(rep.passed());
  EXPECT_NEAR(rep.max_residual(), 0.5, 1e-15);
}

TEST(OrderConditions, HeunThirdOrderIsNotFourthOrder) {
  EXPECT_FALSE(check_order_conditions(builtin_tableau("RK33"), 4).passed());
}

TEST(OrderConditions, ClassicalRungeKuttaIsFourthOrder) {
  const auto rep = check_order_conditions(classical_rk4(), 4);
  EXPECT_EQ(rep.conditions.size(), 8u);
  EXPECT_TRUE(rep.passed());
}

TEST(OrderConditions, RejectsUnsupportedOrder) {
  EXPECT_THROW(check_order_conditions(builtin_tableau("RK11"), 5), ValidationError);
}

TEST(EquilibriumConditions, BuiltinsPass) {
  for (const char* name : {"RK11", "RK22", "RK33"})
    EXPECT_TRUE(check_equilibrium_conditions(builtin_tableau(name)).passed()) << name;
  const ButcherTableau t = builtin_tableau("RK33");
  EXPECT_NEAR(t.a(2, 1) * t.c(1), t.c(2) * t.c(2) / 2.0, 1e-16);
}

TEST(EquilibriumConditions, ClassicalRungeKuttaFails) {
  const auto rep = check_equilibrium_conditions(classical_rk4());
  EXPECT_FALSE(rep.passed());
  EXPECT_GT(rep.max_residual(), 1e-3);
}

TEST(EquilibriumConditions, MatchesHandWrittenThreeAndFourStageConditions) {
  // A four-stage tableau with generic coefficients.
  const ButcherTableau t("generic", 1, {{0.3}, {0.1, 0.4}, {0.2, 0.3, 0.25}, {0.1, 0.2, 0.3, 0.4}});
  const double c1 = t.c(1), c2 = t.c(2), c3 = t.c(3);
  const auto rep = check_equilibrium_conditions(t);
  auto find = [&](const std::string& name) {
    for (const auto& c : rep.conditions)
      if (c.name == name) return c;
    throw std::runtime_error("missing " + name);
  };
  const auto s2 = find("stage 2, x^2");
  EXPECT_NEAR(s2.value - s2.expected, t.a(2, 1) * c1 - c2 * c2 / 2.0, 1e-15);
  const auto s32 = find("stage 3, x^2");
  EXPECT_NEAR(s32.value - s32.expected, t.a(3, 1) * c1 + t.a(3, 2) * c2 - c3 * c3 / 2.0, 1e-15);
  const auto s33 = find("stage 3, x^3");
  // Coefficient of x^3 pairs a_{3,2} with phi_2's quadratic term.
  EXPECT_NEAR(s33.value - s33.expected, t.a(3, 2) * c2 * c2 / 2.0 - c3 * c3 * c3 / 6.0, 1e-15);
}

TEST(EquilibriumConditions, RejectsFiveStages) {
  const ButcherTableau t("five", 1, {{1.0}, {0.5, 0.5}, {0.5, 0.0, 0.5}, {0.25, 0.25, 0.25, 0.25},
                                     {0.2, 0.2, 0.2, 0.2, 0.2}});
  EXPECT_THROW(check_equilibrium_conditions(t), ValidationError);
}

}  // namespace
