#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "efrk/error.hpp"
#include "efrk/fft.hpp"
#include "efrk/grid.hpp"

namespace efrk {

/// Grid function in physical space.
struct RealField {
  Grid grid;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(const Grid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}
  RealField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw ValidationError("field: value count does not match grid size");
  }

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// All N Fourier coefficients in grid flattening order.
struct SpectralField {
  Grid grid;
  std::vector<Complex> coeffs;
};

/// One real value per Fourier mode, in grid flattening order.
struct Symbol {
  Grid grid;
  std::vector<double> values;
};

/// Samples `fn` at the grid nodes. `fn` receives the coordinate array.
template <class Fn>
RealField sample(const Grid& grid, Fn&& fn) {
  RealField u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    std::array<double, Grid::kMaxDim> x{0.0, 0.0, 0.0};
    for (int k = 0; k < grid.dim(); ++k) x[k] = grid.coordinate(k, idx[k]);
    u[i] = fn(x);
  }
  return u;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw ValidationError(std::string(where) + ": grid mismatch");
}

inline SpectralField forward(const RealField& u) {
  FourierTransform fft(u.grid);
  std::vector<Complex> in(u.values.begin(), u.values.end());
  SpectralField out{u.grid, std::vector<Complex>(u.size())};
  fft.forward_full(in, out.coeffs);
  return out;
}

/// Inverse transform of a Hermitian-symmetric spectrum. The imaginary part is
/// discarded after checking that it is round-off (<= 1e-12 relative).
inline RealField inverse(const SpectralField& s) {
  FourierTransform fft(s.grid);
  std::vector<Complex> out(s.coeffs.size());
  fft.inverse_full(s.coeffs, out);
  double re_max = 0.0;
  double im_max = 0.0;
  RealField u(s.grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    u[i] = out[i].real();
    re_max = std::max(re_max, std::abs(out[i].real()));
    im_max = std::max(im_max, std::abs(out[i].imag()));
  }
  if (im_max > 1e-12 * std::max(re_max, 1e-300) && im_max > 1e-300)
    throw ValidationError("inverse: spectrum is not Hermitian-symmetric");
  return u;
}

namespace detail {

inline double laplacian_mode_1d(int l, int n, double mu) {
  if (2 * l < n) return -(mu * l) * (mu * l);
  if (2 * l == n) {
    const double up = mu * l;
    const double down = mu * (l - n);
    return 0.5 * -(up * up) + 0.5 * -(down * down);
  }
  return -(mu * (l - n)) * (mu * (l - n));
}

}  // namespace detail

/// Eigenvalues of the Fourier collocation Laplacian, one per mode. In several
/// dimensions the symbol is the Kronecker sum of the 1D symbols.
inline Symbol laplacian_symbol(const Grid& grid) {
  Symbol s{grid, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto l = grid.unflatten(i);
    double v = 0.0;
    for (int k = 0; k < grid.dim(); ++k)
      v += detail::laplacian_mode_1d(l[k], grid.points(k), grid.wavenumber(k));
    s.values[i] = v;
  }
  return s;
}

/// Pointwise map of a symbol, g(sym).
template <class Map>
Symbol map_symbol(const Symbol& sym, Map&& g) {
  Symbol out{sym.grid, std::vector<double>(sym.values.size())};
  for (std::size_t i = 0; i < sym.values.size(); ++i) {
    out.values[i] = g(sym.values[i]);
    if (!std::isfinite(out.values[i]))
      throw NumericalError("symbol map produced a non-finite value", 0);
  }
  return out;
}

/// Symbol values in the half (real-to-complex) layout. Mode l is paired with
/// -l so that a diagonal operator followed by taking the real part is applied
/// exactly even for symbols without l <-> -l symmetry.
inline std::vector<double> half_layout(const Symbol& sym,
                                       const FourierTransform& fft) {
  const Grid& g = sym.grid;
  std::vector<double> out(fft.half_size());
  for (std::size_t h = 0; h < out.size(); ++h) {
    const std::size_t full = fft.full_index_of_half(h);
    auto l = g.unflatten(full);
    std::size_t mirror = 0;
    std::size_t stride = 1;
    for (int k = 0; k < g.dim(); ++k) {
      const int n = g.points(k);
      mirror += static_cast<std::size_t>((n - l[k]) % n) * stride;
      stride *= static_cast<std::size_t>(n);
    }
    out[h] = 0.5 * (sym.values[full] + sym.values[mirror]);
  }
  return out;
}

struct IdentityMap {
  double operator()(double x) const noexcept { return x; }
};

/// F^{-1}( g(sym) .* F(u) ), real part. `g` defaults to the identity.
template <class Map = IdentityMap>
RealField apply_symbol(const Symbol& sym, const RealField& u, Map&& g = {}) {
  require_same_grid(sym.grid, u.grid, "apply_symbol");
  const Symbol mapped = map_symbol(sym, std::forward<Map>(g));
  FourierTransform fft(u.grid);
  const auto factor = half_layout(mapped, fft);
  std::vector<Complex> spec(fft.half_size());
  fft.forward_half(u.values, spec);
  for (std::size_t h = 0; h < spec.size(); ++h) spec[h] *= factor[h];
  RealField out(u.grid);
  fft.inverse_half(spec, out.values);
  return out;
}

/// Removes the mean, i.e. zeroes the l = 0 coefficient.
inline RealField project_zero_mean(const RealField& u) {
  double sum = 0.0;
  for (double v : u.values) sum += v;
  const double mean = sum / static_cast<double>(u.size());
  RealField out = u;
  for (double& v : out.values) v -= mean;
  return out;
}

/// Discrete inner product <u, v> = prod_k h_k sum_i u_i v_i.
inline double inner(const RealField& u, const RealField& v) {
  require_same_grid(u.grid, v.grid, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return u.grid.cell_volume() * s;
}

}  // namespace efrk
