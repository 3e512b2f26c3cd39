#pragma once

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "efrk/error.hpp"
#include "efrk/model.hpp"
#include "efrk/spectral.hpp"
#include "efrk/tableau.hpp"
#include "efrk/taylor.hpp"

namespace efrk {

enum class SchemeKind { EFRK, IFRK, LieTrotter, Strang };

/// A one-step method: an exponential-free or integrating-factor RK scheme on a
/// tableau, or one of the two operator splittings (whose nonlinear substep
/// uses RK11 for Lie-Trotter and RK22 for Strang).
struct Scheme {
  SchemeKind kind = SchemeKind::EFRK;
  ButcherTableau tableau = builtin_tableau("RK33");

  std::string label() const {
    const int s = tableau.stages();
    const int p = tableau.order();
    const std::string sp = "(" + std::to_string(s) + "," + std::to_string(p) + ")";
    switch (kind) {
      case SchemeKind::EFRK: return "EFRK" + sp;
      case SchemeKind::IFRK: return "IFRK" + sp;
      case SchemeKind::LieTrotter: return "LieTrotter";
      case SchemeKind::Strang: return "Strang";
    }
    return "?";
  }
};

inline Scheme make_scheme(SchemeKind kind, std::string_view tableau = "RK33") {
  switch (kind) {
    case SchemeKind::LieTrotter: return {kind, builtin_tableau("RK11")};
    case SchemeKind::Strang: return {kind, builtin_tableau("RK22")};
    default: return {kind, builtin_tableau(tableau)};
  }
}

/// Parses "EFRK33", "EFRK(3,3)", "ifrk22", "LieTrotter", "lie-trotter", "Strang".
inline Scheme parse_scheme(std::string_view text) {
  std::string key;
  for (char ch : text)
    if (std::isalnum(static_cast<unsigned char>(ch)))
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (key == "lietrotter" || key == "lie") return make_scheme(SchemeKind::LieTrotter);
  if (key == "strang") return make_scheme(SchemeKind::Strang);
  for (auto [prefix, kind] : {std::pair{"efrk", SchemeKind::EFRK},
                              std::pair{"ifrk", SchemeKind::IFRK}}) {
    const std::string_view pre(prefix);
    if (key.starts_with(pre)) {
      const std::string rest = key.substr(pre.size());
      if (rest == "11" || rest == "1") return make_scheme(kind, "RK11");
      if (rest == "22" || rest == "2") return make_scheme(kind, "RK22");
      if (rest == "33" || rest == "3") return make_scheme(kind, "RK33");
    }
  }
  throw ValidationError("unknown scheme '" + std::string(text) +
                        "' (expected EFRK11..33, IFRK11..33, LieTrotter, Strang)");
}

/// Per-mode multiplier stage i applies to an equilibrium when all previous
/// stages sit on it, at stiffness argument z = -tau * ell >= 0.
///   EFRK: (1 + z sum_j a_{i,j} phi_j(c_j z)) / phi_i(c_i z)
///   IFRK: e^{-c_i z} (1 + z sum_j a_{i,j} e^{c_j z})
inline double damping_factor(const ButcherTableau& t, SchemeKind kind, int i, double z) {
  if (i < 1 || i > t.stages()) throw ValidationError("damping_factor: stage out of range");
  if (kind == SchemeKind::EFRK) {
    double num = 1.0;
    for (int j = 0; j < i; ++j) num += z * t.a(i, j) * phi(j, t.c(j) * z);
    return num / phi(i, t.c(i) * z);
  }
  if (kind == SchemeKind::IFRK) {
    double v = std::exp(-t.c(i) * z);
    for (int j = 0; j < i; ++j) v += z * t.a(i, j) * std::exp(-(t.c(i) - t.c(j)) * z);
    return v;
  }
  throw ValidationError("damping_factor: only EFRK and IFRK have stage multipliers");
}

/// Stepping session for one (grid, model, scheme). Owns the FFT plans, the
/// precomputed symbols and all stage buffers; not shareable between threads.
class Stepper {
 public:
  Stepper(const Grid& grid, const ModelParams& params, Scheme scheme)
      : grid_(grid), params_(params), scheme_(std::move(scheme)), fft_(grid) {
    params_.validate();
    const Symbol lap = laplacian_symbol(grid);
    lap_half_ = half_layout(lap, fft_);
    lk_half_ = half_layout(l_kappa_symbol(lap, params_), fft_);
    const std::size_t nh = fft_.half_size();
    const int s = scheme_.tableau.stages();
    u0_hat_.resize(nh);
    work_hat_.resize(nh);
    scratch_hat_.resize(nh);
    stage_real_.resize(grid.size());
    g_real_.resize(grid.size());
    n_hat_.assign(static_cast<std::size_t>(s) + 1, std::vector<Complex>(nh));
  }

  const Grid& grid() const noexcept { return grid_; }
  const ModelParams& params() const noexcept { return params_; }
  const Scheme& scheme() const noexcept { return scheme_; }

  /// Advances u by one step of size tau.
  RealField step(const RealField& u, double tau) {
    RealField out = u;
    step_in_place(out, tau);
    return out;
  }

  void step_in_place(RealField& u, double tau) {
    require_same_grid(u.grid, grid_, "step");
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw ValidationError("step: tau must be positive and finite");
    check_finite(u.values, 0);
    prepare_factors(tau);
    switch (scheme_.kind) {
      case SchemeKind::EFRK: efrk(u, tau); break;
      case SchemeKind::IFRK: ifrk(u, tau); break;
      case SchemeKind::LieTrotter: lie_trotter(u, tau); break;
      case SchemeKind::Strang: strang(u, tau); break;
    }
  }

 private:
  // N^_kappa(v) = lambda * F(f(v) - kappa v), written into `out`.
  void nonlinear_hat(std::span<const double> v, std::vector<Complex>& out) {
    for (std::size_t k = 0; k < v.size(); ++k)
      g_real_[k] = nonlinearity_f(v[k], params_) - params_.kappa * v[k];
    fft_.forward_half(g_real_, out);
    for (std::size_t h = 0; h < out.size(); ++h) out[h] *= lap_half_[h];
  }

  // Inverse transform of `hat` (preserved) into `dst`, then the finiteness check.
  void to_physical(const std::vector<Complex>& hat, std::span<double> dst, int stage) {
    scratch_hat_ = hat;
    fft_.inverse_half(scratch_hat_, dst);
    check_finite(dst, stage);
  }

  static void check_finite(std::span<const double> v, int stage) {
    for (double x : v)
      if (!std::isfinite(x))
        throw NumericalError("non-finite value after stage " + std::to_string(stage), stage);
  }

  void prepare_factors(double tau) {
    if (cached_tau_ && *cached_tau_ == tau) return;
    const ButcherTableau& t = scheme_.tableau;
    const int s = t.stages();
    const std::size_t nh = fft_.half_size();
    fac_.assign(static_cast<std::size_t>((s + 1) * (s + 1)), {});
    auto at = [&](int i, int j) -> std::vector<double>& { return fac_[i * (s + 1) + j]; };
    switch (scheme_.kind) {
      case SchemeKind::EFRK:
        // (i, i): 1 / phi_i(c_i z);  (0, j): phi_j(c_j z).
        for (int i = 0; i <= s; ++i) {
          auto& inv = at(i, i);
          auto& fwd = at(0, i);
          inv.resize(nh);
          fwd.resize(nh);
          for (std::size_t h = 0; h < nh; ++h) {
            const double z = -tau * lk_half_[h];
            fwd[h] = phi(i, t.c(i) * z);
            inv[h] = 1.0 / phi(i, t.c(i) * z);
          }
        }
        break;
      case SchemeKind::IFRK:
        // (i, j), j < i: e^{-(c_i - c_j) z};  (i, i): e^{-c_i z}.
        for (int i = 1; i <= s; ++i)
          for (int j = 0; j <= i; ++j) {
            auto& f = at(i, j);
            f.resize(nh);
            const double dc = (j == i) ? t.c(i) : t.c(i) - t.c(j);
            for (std::size_t h = 0; h < nh; ++h) f[h] = std::exp(dc * tau * lk_half_[h]);
          }
        break;
      case SchemeKind::LieTrotter:
      case SchemeKind::Strang: {
        auto& f = at(0, 0);
        f.resize(nh);
        const double frac = scheme_.kind == SchemeKind::Strang ? 0.5 : 1.0;
        for (std::size_t h = 0; h < nh; ++h) f[h] = std::exp(frac * tau * lk_half_[h]);
        break;
      }
    }
    cached_tau_ = tau;
  }

  const std::vector<double>& factor(int i, int j) const {
    return fac_[i * (scheme_.tableau.stages() + 1) + j];
  }

  void efrk(RealField& u, double tau) {
    const ButcherTableau& t = scheme_.tableau;
    const int s = t.stages();
    const std::size_t nh = fft_.half_size();
    fft_.forward_half(u.values, u0_hat_);
    // Stage 0: phi_0 = 1.
    nonlinear_hat(u.values, n_hat_[0]);
    for (int i = 1; i <= s; ++i) {
      work_hat_ = u0_hat_;
      for (int j = 0; j < i; ++j) {
        const double w = tau * t.a(i, j);
        if (w == 0.0) continue;
        const auto& nj = n_hat_[j];
        for (std::size_t h = 0; h < nh; ++h) work_hat_[h] += w * nj[h];
      }
      const auto& inv = factor(i, i);
      for (std::size_t h = 0; h < nh; ++h) work_hat_[h] *= inv[h];
      if (i == s) {
        to_physical(work_hat_, u.values, i);
      } else {
        to_physical(work_hat_, stage_real_, i);
        nonlinear_hat(stage_real_, n_hat_[i]);
        const auto& fwd = factor(0, i);
        for (std::size_t h = 0; h < nh; ++h) n_hat_[i][h] *= fwd[h];
      }
    }
  }

  void ifrk(RealField& u, double tau) {
    const ButcherTableau& t = scheme_.tableau;
    const int s = t.stages();
    const std::size_t nh = fft_.half_size();
    fft_.forward_half(u.values, u0_hat_);
    nonlinear_hat(u.values, n_hat_[0]);
    for (int i = 1; i <= s; ++i) {
      const auto& lin = factor(i, i);
      for (std::size_t h = 0; h < nh; ++h) work_hat_[h] = lin[h] * u0_hat_[h];
      for (int j = 0; j < i; ++j) {
        const double w = tau * t.a(i, j);
        if (w == 0.0) continue;
        const auto& f = factor(i, j);
        const auto& nj = n_hat_[j];
        for (std::size_t h = 0; h < nh; ++h) work_hat_[h] += w * f[h] * nj[h];
      }
      if (i == s) {
        to_physical(work_hat_, u.values, i);
      } else {
        to_physical(work_hat_, stage_real_, i);
        nonlinear_hat(stage_real_, n_hat_[i]);
      }
    }
  }

  // u <- e^{tau L} (u + tau N(u)).
  void lie_trotter(RealField& u, double tau) {
    const std::size_t nh = fft_.half_size();
    fft_.forward_half(u.values, u0_hat_);
    nonlinear_hat(u.values, n_hat_[0]);
    const auto& e = factor(0, 0);
    for (std::size_t h = 0; h < nh; ++h)
      work_hat_[h] = e[h] * (u0_hat_[h] + tau * n_hat_[0][h]);
    to_physical(work_hat_, u.values, 1);
  }

  // u <- S_L(tau/2) Heun_N(tau) S_L(tau/2) u.
  void strang(RealField& u, double tau) {
    const std::size_t nh = fft_.half_size();
    const auto& e = factor(0, 0);
    fft_.forward_half(u.values, u0_hat_);
    for (std::size_t h = 0; h < nh; ++h) u0_hat_[h] *= e[h];
    to_physical(u0_hat_, stage_real_, 1);
    nonlinear_hat(stage_real_, n_hat_[0]);
    for (std::size_t h = 0; h < nh; ++h) work_hat_[h] = u0_hat_[h] + tau * n_hat_[0][h];
    to_physical(work_hat_, stage_real_, 2);
    nonlinear_hat(stage_real_, n_hat_[1]);
    for (std::size_t h = 0; h < nh; ++h)
      work_hat_[h] = e[h] * (u0_hat_[h] + 0.5 * tau * (n_hat_[0][h] + n_hat_[1][h]));
    to_physical(work_hat_, u.values, 3);
  }

  Grid grid_;
  ModelParams params_;
  Scheme scheme_;
  FourierTransform fft_;
  std::vector<double> lap_half_;
  std::vector<double> lk_half_;
  std::vector<Complex> u0_hat_, work_hat_, scratch_hat_;
  std::vector<double> stage_real_, g_real_;
  std::vector<std::vector<Complex>> n_hat_;
  std::vector<std::vector<double>> fac_;
  std::optional<double> cached_tau_;
};

inline RealField efrk_step(const RealField& u, const ButcherTableau& t,
                           const ModelParams& p, double tau) {
  return Stepper(u.grid, p, {SchemeKind::EFRK, t}).step(u, tau);
}

inline RealField ifrk_step(const RealField& u, const ButcherTableau& t,
                           const ModelParams& p, double tau) {
  return Stepper(u.grid, p, {SchemeKind::IFRK, t}).step(u, tau);
}

inline RealField lie_trotter_step(const RealField& u, const ModelParams& p, double tau) {
  return Stepper(u.grid, p, make_scheme(SchemeKind::LieTrotter)).step(u, tau);
}

inline RealField strang_step(const RealField& u, const ModelParams& p, double tau) {
  return Stepper(u.grid, p, make_scheme(SchemeKind::Strang)).step(u, tau);
}

}  // namespace efrk
