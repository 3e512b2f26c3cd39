#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "efrk/error.hpp"

namespace efrk {

/// Explicit Runge-Kutta coefficients in the Shu-Osher-like row layout used by
/// the stepper: row i = 1..s holds a_{i,0..i-1}; row s is the weight vector b.
/// Abscissas c_0 = 0 and c_i = sum_j a_{i,j}; c_s = 1 is required.
class ButcherTableau {
 public:
  ButcherTableau(std::string name, int order, std::vector<std::vector<double>> rows)
      : name_(std::move(name)), order_(order), rows_(std::move(rows)) {
    const int s = stages();
    if (s < 1) throw ValidationError("tableau " + name_ + ": needs at least one stage");
    c_.assign(static_cast<std::size_t>(s) + 1, 0.0);
    for (int i = 1; i <= s; ++i) {
      if (static_cast<int>(rows_[i - 1].size()) != i)
        throw ValidationError("tableau " + name_ + ": row " + std::to_string(i) +
                              " must have " + std::to_string(i) + " entries");
      double sum = 0.0;
      for (double v : rows_[i - 1]) sum += v;
      c_[i] = sum;
    }
    if (std::abs(c_[s] - 1.0) > 1e-14)
      throw ValidationError("tableau " + name_ + ": weights must sum to 1");
  }

  const std::string& name() const noexcept { return name_; }
  int stages() const noexcept { return static_cast<int>(rows_.size()); }
  int order() const noexcept { return order_; }

  /// a_{i,j}, 1 <= i <= s, 0 <= j < i. Zero elsewhere.
  double a(int i, int j) const {
    if (i < 1 || i > stages() || j < 0 || j >= i) return 0.0;
    return rows_[i - 1][j];
  }
  double b(int j) const { return a(stages(), j); }
  double c(int i) const { return c_[i]; }

 private:
  std::string name_;
  int order_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> c_;
};

/// Forward Euler, Heun's second- and Heun's third-order methods.
inline ButcherTableau builtin_tableau(std::string_view name) {
  if (name == "RK11") return ButcherTableau("RK11", 1, {{1.0}});
  if (name == "RK22") return ButcherTableau("RK22", 2, {{1.0}, {0.5, 0.5}});
  if (name == "RK33")
    return ButcherTableau("RK33", 3,
                          {{1.0 / 3.0}, {0.0, 2.0 / 3.0}, {0.25, 0.0, 0.75}});
  throw ValidationError("unknown tableau '" + std::string(name) +
                        "' (expected RK11, RK22 or RK33)");
}

/// Classical four-stage fourth-order method. Not equilibrium preserving.
inline ButcherTableau classical_rk4() {
  return ButcherTableau("RK4", 4,
                        {{0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0},
                         {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0}});
}

struct ConditionResult {
  std::string name;
  double value;
  double expected;
  double residual() const { return std::abs(value - expected); }
};

struct ConditionReport {
  std::vector<ConditionResult> conditions;
  double tolerance = 1e-14;

  double max_residual() const {
    double r = 0.0;
    for (const auto& c : conditions) r = std::max(r, c.residual());
    return r;
  }
  bool passed() const { return max_residual() <= tolerance; }
};

/// Rooted-tree order conditions up to order p (p <= 4).
inline ConditionReport check_order_conditions(const ButcherTableau& t, int p,
                                              double tol = 1e-14) {
  if (p < 1 || p > 4) throw ValidationError("order conditions: need 1 <= p <= 4");
  const int s = t.stages();
  // A is s x s over stages 0..s-1, b the last row, c = (c_0..c_{s-1}).
  auto Ac = [&](int i, auto&& cpow) {
    double v = 0.0;
    for (int j = 0; j < i; ++j) v += t.a(i, j) * cpow(j);
    return v;
  };
  auto bsum = [&](auto&& term) {
    double v = 0.0;
    for (int i = 0; i < s; ++i) v += t.b(i) * term(i);
    return v;
  };
  auto c1 = [&](int j) { return t.c(j); };
  auto c2 = [&](int j) { return t.c(j) * t.c(j); };

  ConditionReport rep;
  rep.tolerance = tol;
  rep.conditions.push_back({"b^T 1", bsum([](int) { return 1.0; }), 1.0});
  if (p >= 2) rep.conditions.push_back({"b^T c", bsum(c1), 0.5});
  if (p >= 3) {
    rep.conditions.push_back({"b^T c^2", bsum(c2), 1.0 / 3.0});
    rep.conditions.push_back({"b^T A c", bsum([&](int i) { return Ac(i, c1); }), 1.0 / 6.0});
  }
  if (p >= 4) {
    rep.conditions.push_back(
        {"b^T c^3", bsum([&](int i) { return t.c(i) * t.c(i) * t.c(i); }), 0.25});
    rep.conditions.push_back(
        {"b^T (c . A c)", bsum([&](int i) { return t.c(i) * Ac(i, c1); }), 0.125});
    rep.conditions.push_back(
        {"b^T A c^2", bsum([&](int i) { return Ac(i, c2); }), 1.0 / 12.0});
    rep.conditions.push_back(
        {"b^T A^2 c",
         bsum([&](int i) { return Ac(i, [&](int j) { return Ac(j, c1); }); }),
         1.0 / 24.0});
  }
  return rep;
}

/// Conditions under which every stage multiplier of the exponential-free
/// scheme is identically one on equilibria:
///   1 + x sum_j a_{i,j} phi_j(c_j x) == phi_i(c_i x)   as polynomials in x.
/// Matching the coefficient of x^m gives
///   sum_{j >= m-1} a_{i,j} c_j^{m-1} / (m-1)! = c_i^m / m!,   1 <= m <= i.
/// For m = 1 this is the row-sum definition of c_i; m = 2, i = 2 reads
/// a_{2,1} c_1 = c_2^2 / 2, and so on.
inline ConditionReport check_equilibrium_conditions(const ButcherTableau& t,
                                                    double tol = 1e-14) {
  const int s = t.stages();
  if (s > 4) throw ValidationError("equilibrium conditions: s > 4 unsupported");
  ConditionReport rep;
  rep.tolerance = tol;
  for (int i = 1; i <= s; ++i) {
    double m_fact = 1.0;
    for (int m = 1; m <= i; ++m) {
      const double mm1_fact = m_fact;  // (m-1)!
      m_fact *= m;
      double lhs = 0.0;
      for (int j = m - 1; j < i; ++j)
        lhs += t.a(i, j) * std::pow(t.c(j), m - 1) / mm1_fact;
      const double rhs = std::pow(t.c(i), m) / m_fact;
      rep.conditions.push_back(
          {"stage " + std::to_string(i) + ", x^" + std::to_string(m), lhs, rhs});
    }
  }
  return rep;
}

}  // namespace efrk
