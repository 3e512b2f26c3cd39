#pragma once

#include <cmath>
#include <string>

#include "efrk/error.hpp"
#include "efrk/spectral.hpp"

namespace efrk {

/// Degree-k Taylor polynomial of the exponential, phi_k(z) = sum_{j<=k} z^j / j!,
/// evaluated by Horner's rule. Works for real and complex arguments.
template <class T>
T phi(int k, T z) {
  T r = T(1);
  for (int j = k; j >= 1; --j) r = T(1) + z * r / static_cast<double>(j);
  return r;
}

inline double phi_scalar(int k, double z) { return phi<double>(k, z); }

namespace detail {

inline void check_phi_args(int k, double c, double tau) {
  if (k < 0) throw ValidationError("phi: degree must be >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ValidationError("phi: time step must be positive, got " +
                          std::to_string(tau));
  if (!std::isfinite(c)) throw ValidationError("phi: abscissa must be finite");
}

}  // namespace detail

/// phi_k(-c tau L_kappa) u, with L_kappa given by its symbol (entries <= 0).
inline RealField apply_phi(int k, double c, double tau, const Symbol& l_kappa,
                           const RealField& u) {
  detail::check_phi_args(k, c, tau);
  return apply_symbol(l_kappa, u, [=](double ell) { return phi(k, -c * tau * ell); });
}

/// phi_k(-c tau L_kappa)^{-1} u. Divides by the polynomial value, which is
/// >= 1 on every mode since all Taylor coefficients are positive.
inline RealField apply_phi_inverse(int k, double c, double tau,
                                   const Symbol& l_kappa, const RealField& u) {
  detail::check_phi_args(k, c, tau);
  return apply_symbol(l_kappa, u,
                      [=](double ell) { return 1.0 / phi(k, -c * tau * ell); });
}

/// e^{c tau L_kappa} u. Underflow to zero for very stiff modes is accepted.
inline RealField apply_exp(double c, double tau, const Symbol& l_kappa,
                           const RealField& u) {
  detail::check_phi_args(0, c, tau);
  return apply_symbol(l_kappa, u, [=](double ell) { return std::exp(c * tau * ell); });
}

}  // namespace efrk
