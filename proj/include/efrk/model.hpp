#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "efrk/error.hpp"
#include "efrk/spectral.hpp"

namespace efrk {

/// Parameters of the stabilized Cahn-Hilliard model
///   u_t = Delta_N(-eps^2 Delta_N u + f(u)) = L_kappa u + N_kappa(u).
struct ModelParams {
  double epsilon2 = 0.01;
  double kappa = 2.0;
  double beta = std::sqrt(15.0) / 3.0;
  bool truncate = true;

  /// Throws on inadmissible values; returns advisory warnings otherwise.
  std::vector<std::string> validate() const {
    if (!(std::isfinite(epsilon2) && epsilon2 > 0.0))
      throw ValidationError("model.epsilon2: must be > 0");
    if (!(std::isfinite(kappa) && kappa >= 0.0))
      throw ValidationError("model.kappa: must be >= 0");
    if (!(std::isfinite(beta) && beta > 1.0))
      throw ValidationError("model.beta: must be > 1");
    std::vector<std::string> warnings;
    if (truncate && kappa < min_stable_kappa())
      warnings.push_back("kappa = " + std::to_string(kappa) +
                         " is below (3 beta^2 - 1)/2 = " +
                         std::to_string(min_stable_kappa()) +
                         "; unconditional energy decay is not guaranteed");
    return warnings;
  }

  /// max_{|xi| <= beta} |f'(xi)| / 2.
  double min_stable_kappa() const { return 0.5 * (3.0 * beta * beta - 1.0); }
};

/// Double-well potential F(u) = (u^2 - 1)^2 / 4, or its quadratic extension
/// beyond |u| = beta when truncation is on.
inline double potential_F(double u, const ModelParams& p) {
  if (p.truncate && std::abs(u) > p.beta) {
    const double b = p.beta;
    const double sign = u > 0.0 ? 1.0 : -1.0;
    return 0.5 * (3.0 * b * b - 1.0) * u * u - sign * 2.0 * b * b * b * u +
           0.25 * (3.0 * b * b * b * b + 1.0);
  }
  const double w = u * u - 1.0;
  return 0.25 * w * w;
}

/// f = F'. C^1 across |u| = beta when truncated.
inline double nonlinearity_f(double u, const ModelParams& p) {
  if (p.truncate && std::abs(u) > p.beta) {
    const double b = p.beta;
    const double sign = u > 0.0 ? 1.0 : -1.0;
    return (3.0 * b * b - 1.0) * u - sign * 2.0 * b * b * b;
  }
  return (u * u - 1.0) * u;
}

inline double nonlinearity_df(double u, const ModelParams& p) {
  if (p.truncate && std::abs(u) > p.beta) return 3.0 * p.beta * p.beta - 1.0;
  return 3.0 * u * u - 1.0;
}

/// Per-mode value of L_kappa = Delta_N(-eps^2 Delta_N + kappa): lambda(kappa - eps^2 lambda).
inline double l_kappa_value(double lambda, const ModelParams& p) {
  return lambda * (-p.epsilon2 * lambda + p.kappa);
}

inline Symbol l_kappa_symbol(const Symbol& laplacian, const ModelParams& p) {
  return map_symbol(laplacian, [&](double lam) { return l_kappa_value(lam, p); });
}

inline Symbol l_kappa_symbol(const Grid& grid, const ModelParams& p) {
  return l_kappa_symbol(laplacian_symbol(grid), p);
}

/// Pointwise f(u) - kappa u, the quantity N_kappa applies Delta_N to.
inline RealField stabilized_nonlinearity(const RealField& u, const ModelParams& p) {
  RealField g(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]))
      throw NumericalError("N_kappa: non-finite field value", 0);
    g[i] = nonlinearity_f(u[i], p) - p.kappa * u[i];
  }
  return g;
}

/// N_kappa(u) = Delta_N (f(u) - kappa u), nonlinearity evaluated in physical space.
inline RealField apply_N_kappa(const RealField& u, const ModelParams& p) {
  return apply_symbol(laplacian_symbol(u.grid), stabilized_nonlinearity(u, p));
}

inline RealField apply_L_kappa(const RealField& u, const ModelParams& p) {
  return apply_symbol(l_kappa_symbol(u.grid, p), u);
}

}  // namespace efrk
