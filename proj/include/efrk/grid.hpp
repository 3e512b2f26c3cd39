#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "efrk/error.hpp"

namespace efrk {

/// Uniform periodic grid on a box prod_k [a_k, b_k) with d <= 3 dimensions.
///
/// Grid functions are flattened with the first dimension varying fastest,
/// i.e. index = j_0 + N_0 * (j_1 + N_1 * j_2).
class Grid {
 public:
  static constexpr int kMaxDim = 3;

  Grid() = default;

  int dim() const noexcept { return dim_; }
  int points(int k) const { return n_[k]; }
  double lower(int k) const { return lower_[k]; }
  double upper(int k) const { return upper_[k]; }
  double length(int k) const { return upper_[k] - lower_[k]; }
  double spacing(int k) const { return length(k) / n_[k]; }
  double wavenumber(int k) const { return 2.0 * std::numbers::pi / length(k); }

  /// Total number of grid points N.
  std::size_t size() const noexcept {
    std::size_t total = 1;
    for (int k = 0; k < dim_; ++k) total *= static_cast<std::size_t>(n_[k]);
    return total;
  }

  /// Quadrature weight prod_k h_k of the discrete inner product.
  double cell_volume() const {
    double w = 1.0;
    for (int k = 0; k < dim_; ++k) w *= spacing(k);
    return w;
  }

  /// |Omega|.
  double volume() const {
    double v = 1.0;
    for (int k = 0; k < dim_; ++k) v *= length(k);
    return v;
  }

  /// Coordinate of node j along dimension k.
  double coordinate(int k, int j) const { return lower_[k] + j * spacing(k); }

  /// Splits a flat index into per-dimension indices.
  std::array<int, kMaxDim> unflatten(std::size_t flat) const {
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (int k = 0; k < dim_; ++k) {
      idx[k] = static_cast<int>(flat % static_cast<std::size_t>(n_[k]));
      flat /= static_cast<std::size_t>(n_[k]);
    }
    return idx;
  }

  friend bool operator==(const Grid& x, const Grid& y) {
    if (x.dim_ != y.dim_) return false;
    for (int k = 0; k < x.dim_; ++k) {
      if (x.n_[k] != y.n_[k] || x.lower_[k] != y.lower_[k] ||
          x.upper_[k] != y.upper_[k])
        return false;
    }
    return true;
  }

  friend Grid make_grid(int d, std::span<const int> n,
                        std::span<const double> a, std::span<const double> b);

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> n_{1, 1, 1};
  std::array<double, kMaxDim> lower_{0.0, 0.0, 0.0};
  std::array<double, kMaxDim> upper_{1.0, 1.0, 1.0};
};

/// Builds a validated grid. Every N_k must be even and at least 4, and
/// a_k < b_k.
inline Grid make_grid(int d, std::span<const int> n, std::span<const double> a,
                      std::span<const double> b) {
  if (d < 1 || d > Grid::kMaxDim)
    throw ValidationError("grid: dimension must be 1, 2 or 3, got " +
                          std::to_string(d));
  if (n.size() != static_cast<std::size_t>(d) ||
      a.size() != static_cast<std::size_t>(d) ||
      b.size() != static_cast<std::size_t>(d))
    throw ValidationError("grid: expected " + std::to_string(d) +
                          " entries for n, lower and upper");
  Grid g;
  g.dim_ = d;
  for (int k = 0; k < d; ++k) {
    if (n[k] < 4 || n[k] % 2 != 0)
      throw ValidationError("grid.n[" + std::to_string(k) +
                            "]: must be even and >= 4, got " +
                            std::to_string(n[k]));
    if (!(std::isfinite(a[k]) && std::isfinite(b[k]) && a[k] < b[k]))
      throw ValidationError("grid.lower/upper[" + std::to_string(k) +
                            "]: need finite lower < upper");
    g.n_[k] = n[k];
    g.lower_[k] = a[k];
    g.upper_[k] = b[k];
  }
  return g;
}

inline Grid make_grid_1d(int n, double a, double b) {
  const int ns[] = {n};
  const double as[] = {a};
  const double bs[] = {b};
  return make_grid(1, ns, as, bs);
}

/// Square/cubic grid with the same resolution and bounds in every dimension.
inline Grid make_grid_uniform(int d, int n, double a, double b) {
  const std::array<int, 3> ns{n, n, n};
  const std::array<double, 3> as{a, a, a};
  const std::array<double, 3> bs{b, b, b};
  return make_grid(d, std::span(ns).first(d), std::span(as).first(d),
                   std::span(bs).first(d));
}

}  // namespace efrk
