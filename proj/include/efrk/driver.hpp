#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "efrk/diagnostics.hpp"
#include "efrk/error.hpp"
#include "efrk/model.hpp"
#include "efrk/schemes.hpp"
#include "efrk/spectral.hpp"

namespace efrk {

/// Energy-driven step size control:
///   tau = max(tau_min, tau_max / sqrt(1 + alpha |E'|^2)).
struct AdaptiveParams {
  double alpha = 100.0;
  double tau_min = 1e-5;
  double tau_max = 1e-2;

  void validate() const {
    if (!(tau_min > 0.0 && tau_min <= tau_max && std::isfinite(tau_max)))
      throw ValidationError("adaptive: need 0 < tau_min <= tau_max");
    if (!(alpha >= 0.0 && std::isfinite(alpha)))
      throw ValidationError("adaptive.alpha: must be >= 0");
  }
};

/// E' is the backward difference (E_curr - E_prev) / tau_prev.
inline double adaptive_tau(double e_curr, double e_prev, double tau_prev,
                           const AdaptiveParams& p) {
  if (!(tau_prev > 0.0)) throw ValidationError("adaptive_tau: tau_prev must be > 0");
  const double de = (e_curr - e_prev) / tau_prev;
  const double tau = p.tau_max / std::sqrt(1.0 + p.alpha * de * de);
  return std::min(p.tau_max, std::max(p.tau_min, tau));
}

enum class InitialKind { Sines, Tanh, Random, Constant, Field };

/// Initial data. Sines: 0.1 (sin(3 pi x) + sin(5 pi x)) in the first
/// coordinate. Tanh: tanh((0.5 - |x|) / (sqrt(2) eps)). Random: independent
/// uniform samples in [low, high]. Field: an explicit grid function.
struct InitialCondition {
  InitialKind kind = InitialKind::Sines;
  double low = -0.5;
  double high = 0.5;
  double value = 0.0;
  std::optional<RealField> field;
  double t0 = 0.0;  // start time when restarting from a field
};

/// Uniform samples from a 64-bit Mersenne Twister; the top 53 bits of each
/// draw are mapped to [0, 1) so the sequence is identical on every platform.
inline RealField random_field(const Grid& grid, std::uint64_t seed, double low, double high) {
  std::mt19937_64 gen(seed);
  RealField u(grid);
  for (auto& v : u.values) {
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    v = low + (high - low) * unit;
  }
  return u;
}

inline RealField make_initial(const Grid& grid, const ModelParams& model,
                              const InitialCondition& ic, std::uint64_t seed) {
  switch (ic.kind) {
    case InitialKind::Sines:
      return sample(grid, [](const auto& x) {
        return 0.1 * (std::sin(3.0 * std::numbers::pi * x[0]) +
                      std::sin(5.0 * std::numbers::pi * x[0]));
      });
    case InitialKind::Tanh: {
      const double width = std::sqrt(2.0) * std::sqrt(model.epsilon2);
      return sample(grid, [&](const auto& x) {
        return std::tanh((0.5 - std::abs(x[0])) / width);
      });
    }
    case InitialKind::Random: return random_field(grid, seed, ic.low, ic.high);
    case InitialKind::Constant: return RealField(grid, ic.value);
    case InitialKind::Field:
      if (!ic.field) throw ValidationError("initial: field missing");
      require_same_grid(ic.field->grid, grid, "initial field");
      return *ic.field;
  }
  throw ValidationError("initial: unknown kind");
}

struct RunConfig {
  Grid grid = make_grid_1d(64, -1.0, 1.0);
  ModelParams model;
  Scheme scheme;
  double tau = 1e-3;                        // uniform step, ignored when adaptive
  std::optional<AdaptiveParams> adaptive;
  double T = 0.1;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 20240501;
  InitialCondition initial;

  void validate() const {
    model.validate();
    if (adaptive) adaptive->validate();
    else if (!(tau > 0.0 && std::isfinite(tau))) throw ValidationError("tau: must be > 0");
    if (!(T > initial.t0 && std::isfinite(T))) throw ValidationError("T: must exceed start time");
    for (double s : snapshot_times)
      if (s < initial.t0 || s > T) throw ValidationError("snapshots: times must lie in [t0, T]");
  }

  /// Uniform step size, or tau_min for adaptive runs.
  double base_tau() const { return adaptive ? adaptive->tau_min : tau; }
};

struct Snapshot {
  double t;
  RealField field;
};

/// Reference fields at given times; errors are reported where a record's time
/// coincides with one of them.
struct ReferenceTrajectory {
  std::vector<Snapshot> states;

  const RealField* at(double t) const {
    for (const auto& s : states)
      if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return &s.field;
    return nullptr;
  }
};

struct RunResult {
  RealField final_state;
  std::vector<TimeSeriesRecord> series;
  std::vector<Snapshot> snapshots;
};

struct RunObserver {
  std::function<void(const TimeSeriesRecord&)> on_record;
  std::function<void(const Snapshot&)> on_snapshot;
};

/// Advances the initial data to T. Steps are shortened to land exactly on
/// snapshot and reference times; one record is emitted for t0 and one per
/// step. Deterministic given the configuration (seed included) except for
/// the wall-clock column.
inline RunResult run(const RunConfig& cfg, const ReferenceTrajectory* reference = nullptr,
                     const RunObserver& observer = {}) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  Stepper stepper(cfg.grid, cfg.model, cfg.scheme);
  EnergyEvaluator energy_of(cfg.grid, cfg.model);
  RunResult res;
  RealField u = make_initial(cfg.grid, cfg.model, cfg.initial, cfg.seed);
  double t = cfg.initial.t0;

  std::vector<double> landings = cfg.snapshot_times;
  if (reference)
    for (const auto& s : reference->states) landings.push_back(s.t);
  landings.push_back(cfg.T);
  std::sort(landings.begin(), landings.end());
  landings.erase(std::unique(landings.begin(), landings.end()), landings.end());
  std::erase_if(landings, [&](double x) { return x <= t || x > cfg.T; });

  auto is_snapshot = [&](double time) {
    return std::any_of(cfg.snapshot_times.begin(), cfg.snapshot_times.end(),
                       [&](double s) { return s == time; });
  };
  auto emit = [&](std::size_t n, double tau_used, double e) {
    TimeSeriesRecord r;
    r.step = n;
    r.t = t;
    r.tau = tau_used;
    r.energy = e;
    r.mass = mass(u);
    if (reference)
      if (const RealField* ref = reference->at(t)) r.err_l2 = distance_l2(u, *ref);
    r.cpu_s = elapsed();
    res.series.push_back(r);
    if (observer.on_record) observer.on_record(r);
    if (is_snapshot(t)) {
      res.snapshots.push_back({t, u});
      if (observer.on_snapshot) observer.on_snapshot(res.snapshots.back());
    }
  };

  double e_prev = energy_of(u);
  emit(0, 0.0, e_prev);

  double tau_next = cfg.base_tau();
  std::size_t n = 0;
  std::size_t next = 0;
  while (next < landings.size()) {
    const double land = landings[next];
    const double gap = land - t;
    double step = tau_next;
    bool lands = false;
    if (step >= gap * (1.0 - 1e-9)) {
      // A full step that reaches the landing point within round-off keeps its
      // nominal size so that restarted runs replay bit-identically.
      if (step > gap * (1.0 + 1e-9)) step = gap;
      lands = true;
    } else if (cfg.adaptive && gap - step < cfg.adaptive->tau_min) {
      // Avoid leaving a remainder shorter than tau_min.
      step = gap <= cfg.adaptive->tau_max ? gap : 0.5 * gap;
      lands = step == gap;
    }
    try {
      stepper.step_in_place(u, step);
    } catch (const NumericalError& err) {
      throw NumericalError(std::string(err.what()) + " at t = " + std::to_string(t) +
                               ", step " + std::to_string(n + 1),
                           err.stage(), t, n + 1);
    }
    ++n;
    if (lands) {
      t = land;
      ++next;
    } else {
      t += step;
    }
    const double e = energy_of(u);
    emit(n, step, e);
    if (cfg.adaptive) tau_next = adaptive_tau(e, e_prev, step, *cfg.adaptive);
    e_prev = e;
  }
  res.final_state = std::move(u);
  return res;
}

/// Configuration of the self-reference run: EFRK(3,3) without stabilization at
/// tau = base_tau / 2^refine on the same grid and initial data.
inline RunConfig reference_config(const RunConfig& cfg, int refine) {
  if (refine < 4) throw ValidationError("reference: refine must be >= 4");
  RunConfig ref = cfg;
  ref.scheme = make_scheme(SchemeKind::EFRK, "RK33");
  ref.model.kappa = 0.0;
  ref.tau = cfg.base_tau() / std::ldexp(1.0, refine);
  ref.adaptive.reset();
  return ref;
}

inline RealField reference_solution(const RunConfig& cfg, int refine) {
  RunConfig ref = reference_config(cfg, refine);
  ref.snapshot_times.clear();
  return run(ref).final_state;
}

/// Reference states at the requested times (T is always included).
inline ReferenceTrajectory reference_trajectory(const RunConfig& cfg, int refine,
                                                std::vector<double> times) {
  RunConfig ref = reference_config(cfg, refine);
  times.push_back(cfg.T);
  ref.snapshot_times = times;
  ReferenceTrajectory traj;
  traj.states = run(ref).snapshots;
  return traj;
}

}  // namespace efrk
