#pragma once

// Thin RAII layer over FFTW. Plans are created once per grid shape and kept in
// a process-wide registry; FFTW's planner is not reentrant, so creation is
// serialized while execution through the new-array interface is thread-safe.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "efrk/grid.hpp"

namespace efrk {

using Complex = std::complex<double>;

namespace detail {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const;
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline void PlanDeleter::operator()(fftw_plan_s* p) const {
  if (p != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
}

struct PlanSet {
  PlanHandle r2c;
  PlanHandle c2r;
  PlanHandle c2c_forward;
  PlanHandle c2c_backward;
};

using ShapeKey = std::array<int, Grid::kMaxDim + 1>;

inline std::shared_ptr<const PlanSet> plans_for(const Grid& grid) {
  static std::map<ShapeKey, std::shared_ptr<const PlanSet>> registry;
  ShapeKey key{grid.dim(), 0, 0, 0};
  for (int k = 0; k < grid.dim(); ++k) key[k + 1] = grid.points(k);

  std::lock_guard lock(planner_mutex());
  if (auto it = registry.find(key); it != registry.end()) return it->second;

  // FFTW is row-major (last index fastest); our first dimension is fastest.
  std::array<int, Grid::kMaxDim> dims{};
  const int d = grid.dim();
  for (int k = 0; k < d; ++k) dims[k] = grid.points(d - 1 - k);

  const std::size_t n = grid.size();
  const std::size_t nh = n / static_cast<std::size_t>(grid.points(0)) *
                         static_cast<std::size_t>(grid.points(0) / 2 + 1);
  std::vector<double> real(n);
  std::vector<Complex> half(nh);
  std::vector<Complex> full_in(n);
  std::vector<Complex> full_out(n);
  auto* hp = reinterpret_cast<fftw_complex*>(half.data());
  auto* fi = reinterpret_cast<fftw_complex*>(full_in.data());
  auto* fo = reinterpret_cast<fftw_complex*>(full_out.data());
  constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

  auto set = std::make_shared<PlanSet>();
  set->r2c.reset(fftw_plan_dft_r2c(d, dims.data(), real.data(), hp, kFlags));
  set->c2r.reset(fftw_plan_dft_c2r(d, dims.data(), hp, real.data(), kFlags));
  set->c2c_forward.reset(
      fftw_plan_dft(d, dims.data(), fi, fo, FFTW_FORWARD, kFlags));
  set->c2c_backward.reset(
      fftw_plan_dft(d, dims.data(), fi, fo, FFTW_BACKWARD, kFlags));
  registry.emplace(key, set);
  return set;
}

}  // namespace detail

/// Discrete Fourier transform pair on a grid with the normalization
/// forward: (1/N) sum_j u_j e^{-i 2 pi l j / N}, inverse: sum_l u^_l e^{i 2 pi l j / N}.
///
/// Two layouts are offered. The full layout holds all N coefficients in grid
/// flattening order. The half layout is the real-to-complex layout in which
/// the first dimension keeps only modes 0..N_0/2; it is what the steppers use.
/// The object is cheap to copy and safe to use concurrently.
class FourierTransform {
 public:
  explicit FourierTransform(const Grid& grid)
      : grid_(grid), plans_(detail::plans_for(grid)) {}

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return grid_.size(); }

  std::size_t half_size() const noexcept {
    return grid_.size() / static_cast<std::size_t>(grid_.points(0)) *
           static_cast<std::size_t>(grid_.points(0) / 2 + 1);
  }

  /// Full flat index of the mode stored at half-layout position `h`.
  std::size_t full_index_of_half(std::size_t h) const {
    const std::size_t n0 = static_cast<std::size_t>(grid_.points(0));
    const std::size_t nh0 = n0 / 2 + 1;
    return (h % nh0) + n0 * (h / nh0);
  }

  void forward_half(std::span<const double> in, std::span<Complex> out) const {
    check(in.size() == size() && out.size() == half_size());
    fftw_execute_dft_r2c(plans_->r2c.get(), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / static_cast<double>(size());
    for (auto& c : out) c *= scale;
  }

  /// Inverse of forward_half. The input buffer is used as scratch and is
  /// overwritten.
  void inverse_half(std::span<Complex> in, std::span<double> out) const {
    check(in.size() == half_size() && out.size() == size());
    fftw_execute_dft_c2r(plans_->c2r.get(),
                         reinterpret_cast<fftw_complex*>(in.data()),
                         out.data());
  }

  void forward_full(std::span<const Complex> in, std::span<Complex> out) const {
    check(in.size() == size() && out.size() == size());
    fftw_execute_dft(plans_->c2c_forward.get(),
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / static_cast<double>(size());
    for (auto& c : out) c *= scale;
  }

  void inverse_full(std::span<const Complex> in, std::span<Complex> out) const {
    check(in.size() == size() && out.size() == size());
    fftw_execute_dft(plans_->c2c_backward.get(),
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }

 private:
  static void check(bool ok) {
    if (!ok) throw ValidationError("fft: buffer size does not match grid");
  }

  Grid grid_;
  std::shared_ptr<const detail::PlanSet> plans_;
};

}  // namespace efrk
