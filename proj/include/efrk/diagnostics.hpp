#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "efrk/model.hpp"
#include "efrk/spectral.hpp"

namespace efrk {

/// One row of a run's time series.
struct TimeSeriesRecord {
  std::size_t step = 0;
  double t = 0.0;
  double tau = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  std::optional<double> err_l2;
  double cpu_s = 0.0;
};

/// <u, 1>.
inline double mass(const RealField& u) {
  double s = 0.0;
  for (double v : u.values) s += v;
  return u.grid.cell_volume() * s;
}

inline double norm_l2(const RealField& u) { return std::sqrt(inner(u, u)); }

inline double norm_linf(const RealField& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

inline double distance_l2(const RealField& u, const RealField& v) {
  require_same_grid(u.grid, v.grid, "distance_l2");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(u.grid.cell_volume() * s);
}

inline double distance_linf(const RealField& u, const RealField& v) {
  require_same_grid(u.grid, v.grid, "distance_linf");
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

/// Evaluates E(u) = -eps^2/2 <u, Delta_N u> + <F(u), 1> with plans and the
/// Laplacian symbol prepared once. The gradient term uses Parseval on the
/// half spectrum, where interior modes of the first dimension count twice.
class EnergyEvaluator {
 public:
  EnergyEvaluator(const Grid& grid, const ModelParams& params)
      : params_(params), fft_(grid), spec_(fft_.half_size()) {
    lap_half_ = half_layout(laplacian_symbol(grid), fft_);
    weight_.resize(fft_.half_size());
    const int n0 = grid.points(0);
    const int nh0 = n0 / 2 + 1;
    for (std::size_t h = 0; h < weight_.size(); ++h) {
      const int l0 = static_cast<int>(h % static_cast<std::size_t>(nh0));
      weight_[h] = (l0 == 0 || 2 * l0 == n0) ? 1.0 : 2.0;
    }
  }

  double operator()(const RealField& u) {
    require_same_grid(u.grid, fft_.grid(), "energy");
    fft_.forward_half(u.values, spec_);
    double grad = 0.0;
    for (std::size_t h = 0; h < spec_.size(); ++h)
      grad += weight_[h] * (-lap_half_[h]) * std::norm(spec_[h]);
    const Grid& g = u.grid;
    double pot = 0.0;
    for (double v : u.values) pot += potential_F(v, params_);
    return 0.5 * params_.epsilon2 * g.volume() * grad + g.cell_volume() * pot;
  }

 private:
  ModelParams params_;
  FourierTransform fft_;
  std::vector<Complex> spec_;
  std::vector<double> lap_half_;
  std::vector<double> weight_;
};

inline double energy(const RealField& u, const ModelParams& params) {
  EnergyEvaluator e(u.grid, params);
  return e(u);
}

/// Values of a fine-grid field at the nodes of a nested coarse grid (every
/// dimension of the fine grid an integer multiple of the coarse one).
inline RealField restrict_to(const RealField& fine, const Grid& coarse) {
  const Grid& fg = fine.grid;
  if (fg.dim() != coarse.dim()) throw ValidationError("restrict_to: dimension mismatch");
  std::array<int, Grid::kMaxDim> ratio{1, 1, 1};
  for (int k = 0; k < fg.dim(); ++k) {
    if (fg.points(k) % coarse.points(k) != 0 || fg.lower(k) != coarse.lower(k) ||
        fg.upper(k) != coarse.upper(k))
      throw ValidationError("restrict_to: grids do not nest");
    ratio[k] = fg.points(k) / coarse.points(k);
  }
  RealField out(coarse);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const auto idx = coarse.unflatten(i);
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int k = 0; k < fg.dim(); ++k) {
      flat += static_cast<std::size_t>(idx[k] * ratio[k]) * stride;
      stride *= static_cast<std::size_t>(fg.points(k));
    }
    out[i] = fine[flat];
  }
  return out;
}

}  // namespace efrk
