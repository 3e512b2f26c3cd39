#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "efrk/diagnostics.hpp"
#include "efrk/driver.hpp"
#include "efrk/error.hpp"
#include "efrk/schemes.hpp"
#include "efrk/stability.hpp"
#include "efrk/tableau.hpp"

namespace efrk {

// ---------------------------------------------------------------------------
// Worker pool for independent simulations

/// EFRK_THREADS if set to a positive integer, else the hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EFRK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = worker_count()) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

inline double log2_ratio(double coarse, double fine) { return std::log2(coarse / fine); }

// ---------------------------------------------------------------------------
// Temporal convergence

struct ConvergeTimeSpec {
  std::vector<Scheme> schemes{make_scheme(SchemeKind::EFRK, "RK11"),
                              make_scheme(SchemeKind::EFRK, "RK22"),
                              make_scheme(SchemeKind::EFRK, "RK33")};
  double delta = 1e-2;
  int k_lo = 6;
  int k_hi = 11;
  int n = 512;
  double lower = -1.0;
  double upper = 1.0;
  ModelParams model;
  double T = 0.1;
  int refine = 4;  // reference step delta / 2^(k_hi + refine)
  InitialCondition initial;

  void validate() const {
    if (!(delta > 0.0)) throw ValidationError("converge.delta: must be > 0");
    if (k_lo < 0 || k_hi > 14 || k_lo >= k_hi)
      throw ValidationError("converge.k: need 0 <= k_lo < k_hi <= 14");
    if (refine < 4) throw ValidationError("converge.refine: must be >= 4");
    if (schemes.empty()) throw ValidationError("converge.schemes: empty");
  }

  RunConfig base() const {
    RunConfig c;
    c.grid = make_grid_1d(n, lower, upper);
    c.model = model;
    c.T = T;
    c.initial = initial;
    return c;
  }
};

struct ConvergenceRow {
  std::string scheme;
  int k = 0;
  double tau = 0.0;
  double error = 0.0;
  std::optional<double> order;  // log2(e_{k-1} / e_k)
};

struct ConvergeTimeResult {
  double reference_tau = 0.0;
  std::vector<ConvergenceRow> rows;  // grouped by scheme, k ascending
};

inline ConvergeTimeResult converge_time(const ConvergeTimeSpec& spec) {
  spec.validate();
  RunConfig base = spec.base();
  base.tau = spec.delta / std::ldexp(1.0, spec.k_hi);
  base.validate();
  ConvergeTimeResult res;
  res.reference_tau = reference_config(base, spec.refine).tau;
  const RealField ref = reference_solution(base, spec.refine);

  const int nk = spec.k_hi - spec.k_lo + 1;
  res.rows.resize(spec.schemes.size() * static_cast<std::size_t>(nk));
  parallel_for(res.rows.size(), [&](std::size_t idx) {
    const auto& scheme = spec.schemes[idx / nk];
    const int k = spec.k_lo + static_cast<int>(idx % nk);
    RunConfig c = base;
    c.scheme = scheme;
    c.tau = spec.delta / std::ldexp(1.0, k);
    auto& row = res.rows[idx];
    row.scheme = scheme.label();
    row.k = k;
    row.tau = c.tau;
    row.error = distance_l2(run(c).final_state, ref);
  });
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    if (i % nk != 0) res.rows[i].order = log2_ratio(res.rows[i - 1].error, res.rows[i].error);
  return res;
}

// ---------------------------------------------------------------------------
// Spatial convergence

struct ConvergeSpaceSpec {
  Scheme scheme = make_scheme(SchemeKind::EFRK, "RK33");
  int p_lo = 2;    // N = 2^p_lo .. 2^p_hi
  int p_hi = 10;
  int p_ref = 11;  // reference resolution 2^p_ref
  double tau = 1e-2 / 4096.0;
  double lower = -1.0;
  double upper = 1.0;
  ModelParams model;
  double T = 0.1;
  InitialCondition initial;

  void validate() const {
    if (p_lo < 2 || p_hi >= p_ref || p_lo > p_hi || p_ref > 16)
      throw ValidationError("converge-space: need 2 <= p_lo <= p_hi < p_ref <= 16");
    if (!(tau > 0.0)) throw ValidationError("converge-space.tau: must be > 0");
  }
};

struct SpaceRow {
  int n = 0;
  double error = 0.0;
};

/// Error of each coarse solution at its own nodes against the same scheme
/// and step on the finest grid.
inline std::vector<SpaceRow> converge_space(const ConvergeSpaceSpec& spec) {
  spec.validate();
  auto config = [&](int p) {
    RunConfig c;
    c.grid = make_grid_1d(1 << p, spec.lower, spec.upper);
    c.model = spec.model;
    c.scheme = spec.scheme;
    c.tau = spec.tau;
    c.T = spec.T;
    c.initial = spec.initial;
    return c;
  };
  const RealField ref = run(config(spec.p_ref)).final_state;
  std::vector<SpaceRow> rows(static_cast<std::size_t>(spec.p_hi - spec.p_lo + 1));
  parallel_for(rows.size(), [&](std::size_t i) {
    const int p = spec.p_lo + static_cast<int>(i);
    const RunConfig c = config(p);
    rows[i] = {1 << p, distance_l2(run(c).final_state, restrict_to(ref, c.grid))};
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Equilibrium preservation from a near-steady interface profile

struct EquilibriumSpec {
  std::vector<Scheme> schemes{
      make_scheme(SchemeKind::EFRK, "RK11"), make_scheme(SchemeKind::EFRK, "RK22"),
      make_scheme(SchemeKind::EFRK, "RK33"), make_scheme(SchemeKind::IFRK, "RK11"),
      make_scheme(SchemeKind::IFRK, "RK22"), make_scheme(SchemeKind::IFRK, "RK33"),
      make_scheme(SchemeKind::LieTrotter),   make_scheme(SchemeKind::Strang)};
  int n = 2048;
  double lower = -1.0;
  double upper = 1.0;
  ModelParams model{.epsilon2 = 0.0004, .kappa = 0.0};
  double tau = 5e-4;
  double tau_lie_trotter = 1e-4;
  double T = 0.02;
};

struct EquilibriumResult {
  std::string scheme;
  double tau = 0.0;
  double drift_linf = 0.0;
  double energy_initial = 0.0;
  double energy_final = 0.0;
  RealField initial;
  RealField final_state;
  std::vector<TimeSeriesRecord> series;
};

inline std::vector<EquilibriumResult> equilibrium(const EquilibriumSpec& spec) {
  std::vector<EquilibriumResult> out(spec.schemes.size());
  parallel_for(out.size(), [&](std::size_t i) {
    RunConfig c;
    c.grid = make_grid_1d(spec.n, spec.lower, spec.upper);
    c.model = spec.model;
    c.scheme = spec.schemes[i];
    c.tau = c.scheme.kind == SchemeKind::LieTrotter ? spec.tau_lie_trotter : spec.tau;
    c.T = spec.T;
    c.initial.kind = InitialKind::Tanh;
    auto r = run(c);
    auto& e = out[i];
    e.scheme = c.scheme.label();
    e.tau = c.tau;
    e.initial = make_initial(c.grid, c.model, c.initial, c.seed);
    e.drift_linf = distance_linf(r.final_state, e.initial);
    e.energy_initial = r.series.front().energy;
    e.energy_final = r.series.back().energy;
    e.final_state = std::move(r.final_state);
    e.series = std::move(r.series);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Long runs on 2D boxes: coarsening, adaptive stepping, scheme comparison

/// Energy and mass statistics of a time series.
struct SeriesStats {
  std::size_t steps = 0;
  double max_mass_drift = 0.0;        // max |mass_n - mass_0|
  double max_energy_increase = 0.0;   // max (E_{n+1} - E_n) / |E_n|, may be negative
  double tau_min = INFINITY;
  double tau_max = 0.0;
  double final_energy = 0.0;
  double cpu_s = 0.0;
};

inline SeriesStats series_stats(const std::vector<TimeSeriesRecord>& s) {
  SeriesStats st;
  if (s.empty()) return st;
  st.steps = s.size() - 1;
  st.max_energy_increase = -INFINITY;
  for (std::size_t i = 1; i < s.size(); ++i) {
    st.max_mass_drift = std::max(st.max_mass_drift, std::abs(s[i].mass - s[0].mass));
    st.max_energy_increase = std::max(st.max_energy_increase,
                                      (s[i].energy - s[i - 1].energy) / std::abs(s[i - 1].energy));
    st.tau_min = std::min(st.tau_min, s[i].tau);
    st.tau_max = std::max(st.tau_max, s[i].tau);
  }
  st.final_energy = s.back().energy;
  st.cpu_s = s.back().cpu_s;
  return st;
}

/// Spinodal decomposition from random data on (-pi, pi)^2.
inline RunConfig coarsening_config(int n = 128, double T = 100.0) {
  RunConfig c;
  c.grid = make_grid_uniform(2, n, -std::numbers::pi, std::numbers::pi);
  c.model.epsilon2 = 0.0025;
  c.initial.kind = InitialKind::Random;
  c.T = T;
  c.tau = 1e-3;
  return c;
}

/// The same data on (0, 2 pi)^2 with a thinner interface.
inline RunConfig comparison_config(int n = 128, double T = 50.0) {
  RunConfig c;
  c.grid = make_grid_uniform(2, n, 0.0, 2.0 * std::numbers::pi);
  c.model.epsilon2 = 0.002;
  c.initial.kind = InitialKind::Random;
  c.T = T;
  c.adaptive = AdaptiveParams{};
  return c;
}

struct LabeledRun {
  std::string label;
  RunConfig config;
};

struct LabeledResult {
  std::string label;
  RunConfig config;
  RunResult result;
  SeriesStats stats;
};

/// Runs independent configurations concurrently.
inline std::vector<LabeledResult> run_all(const std::vector<LabeledRun>& runs,
                                          const ReferenceTrajectory* reference = nullptr) {
  std::vector<LabeledResult> out(runs.size());
  parallel_for(runs.size(), [&](std::size_t i) {
    out[i].label = runs[i].label;
    out[i].config = runs[i].config;
    out[i].result = run(runs[i].config, reference);
    out[i].stats = series_stats(out[i].result.series);
  });
  return out;
}

inline std::string tau_label(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

/// Uniform-step runs of each scheme at each step size.
inline std::vector<LabeledRun> coarsening_runs(const RunConfig& base,
                                               const std::vector<Scheme>& schemes,
                                               const std::vector<double>& taus) {
  std::vector<LabeledRun> runs;
  for (const auto& s : schemes)
    for (double tau : taus) {
      RunConfig c = base;
      c.scheme = s;
      c.tau = tau;
      c.adaptive.reset();
      runs.push_back({s.label() + "_tau" + tau_label(tau), c});
    }
  return runs;
}

/// Adaptive run plus uniform runs at tau_min and tau_max.
inline std::vector<LabeledRun> adaptive_runs(const RunConfig& base, const AdaptiveParams& ap) {
  RunConfig adaptive = base;
  adaptive.adaptive = ap;
  RunConfig fine = base;
  fine.adaptive.reset();
  fine.tau = ap.tau_min;
  RunConfig coarse = fine;
  coarse.tau = ap.tau_max;
  return {{"adaptive", adaptive},
          {"uniform_tau" + tau_label(ap.tau_min), fine},
          {"uniform_tau" + tau_label(ap.tau_max), coarse}};
}

// ---------------------------------------------------------------------------
// Stability data

struct BoundaryData {
  int s = 0;
  double theta = 0.0;
  std::vector<Polyline> lines;
  double max_left_half_plane = 0.0;  // max |Phi| on the left half of the window
};

inline BoundaryData stability_data(int s, double theta, int resolution, const Window& win) {
  BoundaryData b;
  b.s = s;
  b.theta = theta;
  b.lines = stability_boundary(s, theta, resolution, win);
  Window left = win;
  left.re_max = std::min(0.0, win.re_max);
  if (left.re_min < left.re_max) b.max_left_half_plane = max_amplification(s, theta, left, resolution);
  return b;
}

}  // namespace efrk
