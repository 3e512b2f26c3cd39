// Command-line harness: single runs from a JSON config and canned studies.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "efrk/efrk.hpp"

namespace fs = std::filesystem;
using namespace efrk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

std::string file_label(std::string s) {
  std::string out;
  for (char c : s)
    if (c != '(' && c != ')' && c != ',') out += c;
  return out;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw ValidationError("output: cannot create directory " + dir);
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<Scheme> parse_schemes(const std::vector<std::string>& names) {
  std::vector<Scheme> out;
  for (const auto& n : names) out.push_back(parse_scheme(n));
  if (out.empty()) throw ValidationError("schemes: empty list");
  return out;
}

json scheme_names(const std::vector<Scheme>& s) {
  json a = json::array();
  for (const auto& x : s) a.push_back(x.label());
  return a;
}

json model_json(const ModelParams& m) {
  return {{"epsilon2", m.epsilon2}, {"kappa", m.kappa}, {"beta", m.beta}, {"truncate", m.truncate}};
}

void warn_model(const ModelParams& m) {
  for (const auto& w : m.validate()) std::cerr << "warning: " << w << '\n';
}

std::string snapshot_name(std::size_t index, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%03zu_t%g.efrksnap", index, t);
  return buf;
}

// Writes series.csv incrementally and snapshots as they are produced.
struct RunWriter {
  explicit RunWriter(const fs::path& dir) : dir_(dir), csv_(dir / "series.csv", series_header()) {}

  RunObserver observer() {
    RunObserver o;
    o.on_record = [this](const TimeSeriesRecord& r) { csv_.write_row(series_row(r)); };
    o.on_snapshot = [this](const Snapshot& s) {
      write_snapshot(dir_ / snapshot_name(count_++, s.t), s.field, s.t);
    };
    return o;
  }

 private:
  fs::path dir_;
  CsvWriter csv_;
  std::size_t count_ = 0;
};

void write_run_outputs(const fs::path& dir, const LabeledResult& r) {
  fs::create_directories(dir);
  write_series(dir / "series.csv", r.result.series);
  std::size_t i = 0;
  for (const auto& s : r.result.snapshots) write_snapshot(dir / snapshot_name(i++, s.t), s.field, s.t);
  write_snapshot(dir / "final.efrksnap", r.result.final_state, r.result.series.back().t);
}

const std::vector<std::string>& run_summary_header() {
  static const std::vector<std::string> h{"run",        "scheme",          "steps",
                                          "tau_min",    "tau_max",         "max_mass_drift",
                                          "max_energy_increase", "final_energy", "cpu_s"};
  return h;
}

std::vector<std::string> run_summary_row(const LabeledResult& r) {
  const auto& s = r.stats;
  return {r.label,
          r.config.scheme.label(),
          std::to_string(s.steps),
          fmt_double(s.tau_min),
          fmt_double(s.tau_max),
          fmt_double(s.max_mass_drift),
          fmt_double(s.max_energy_increase),
          fmt_double(s.final_energy),
          fmt_double(s.cpu_s)};
}

void print_run_summary(const std::vector<LabeledResult>& rs) {
  std::printf("%-28s %10s %12s %12s %14s %14s %16s\n", "run", "steps", "tau_min", "tau_max",
              "mass_drift", "max_dE/|E|", "E(T)");
  for (const auto& r : rs)
    std::printf("%-28s %10zu %12.4e %12.4e %14.4e %14.4e %16.10e\n", r.label.c_str(),
                r.stats.steps, r.stats.tau_min, r.stats.tau_max, r.stats.max_mass_drift,
                r.stats.max_energy_increase, r.stats.final_energy);
}

json run_config_json(const RunConfig& c) {
  ConfigFile cf;
  cf.run = c;
  json j = resolved_config(cf);
  j.erase("output");
  j.erase("reference_refine");
  return j;
}

// ---------------------------------------------------------------------------

struct RunOptions {
  std::string config;
  std::optional<std::string> scheme, output;
  std::optional<double> tau, T, kappa, epsilon2;
  std::optional<std::uint64_t> seed;
  std::optional<int> refine;
};

int cmd_run(const RunOptions& o) {
  std::ifstream in(o.config);
  if (!in) throw ValidationError("cannot open config " + o.config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: expected an object");
  if (o.scheme) j["scheme"] = *o.scheme;
  if (o.output) j["output"] = *o.output;
  if (o.tau) {
    j.erase("adaptive");
    j["tau"] = *o.tau;
  }
  if (o.T) j["T"] = *o.T;
  if (o.seed) j["seed"] = *o.seed;
  if (o.refine) j["reference_refine"] = *o.refine;
  if (o.kappa) j["model"]["kappa"] = *o.kappa;
  if (o.epsilon2) j["model"]["epsilon2"] = *o.epsilon2;

  const ConfigFile cf = parse_config(j);
  warn_model(cf.run.model);
  const fs::path dir = prepare_dir(cf.output);
  json manifest;
  manifest["command"] = "run";
  manifest["config"] = resolved_config(cf);
  manifest["status"] = "running";
  write_json(dir / "manifest.json", manifest);

  std::optional<ReferenceTrajectory> ref;
  if (cf.reference_refine > 0) {
    std::vector<double> times = cf.run.snapshot_times;
    ref = reference_trajectory(cf.run, cf.reference_refine, times);
  }
  RunWriter writer(dir);
  try {
    const RunResult r = run(cf.run, ref ? &*ref : nullptr, writer.observer());
    write_snapshot(dir / "final.efrksnap", r.final_state, r.series.back().t);
    const SeriesStats st = series_stats(r.series);
    manifest["status"] = "ok";
    manifest["steps"] = st.steps;
    manifest["final_energy"] = st.final_energy;
    manifest["max_mass_drift"] = st.max_mass_drift;
    write_json(dir / "manifest.json", manifest);
    std::printf("%s: %zu steps to t = %g, E = %.12e, mass drift = %.3e\n",
                cf.run.scheme.label().c_str(), st.steps, r.series.back().t, st.final_energy,
                st.max_mass_drift);
  } catch (const NumericalError& e) {
    manifest["status"] = "aborted";
    manifest["abort"] = {{"t", e.time()}, {"step", e.step()}, {"stage", e.stage()},
                         {"message", e.what()}};
    write_json(dir / "manifest.json", manifest);
    throw;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ConvergeOptions {
  std::string mode = "time";
  std::vector<std::string> schemes{"EFRK11", "EFRK22", "EFRK33"};
  double delta = 1e-2;
  int k_lo = 6, k_hi = 11, n = 512, refine = 4;
  int p_lo = 2, p_hi = 10, p_ref = 11;
  std::optional<double> tau;
  double epsilon2 = 0.01, kappa = 2.0, T = 0.1;
  std::string output = "out/converge";
};

int cmd_converge(const ConvergeOptions& o) {
  ModelParams model;
  model.epsilon2 = o.epsilon2;
  model.kappa = o.kappa;
  warn_model(model);
  const fs::path dir = prepare_dir(o.output);
  json manifest;
  manifest["command"] = "converge";
  manifest["mode"] = o.mode;
  manifest["model"] = model_json(model);
  manifest["T"] = o.T;
  manifest["initial"] = {{"type", "sines"}};

  if (o.mode == "time") {
    ConvergeTimeSpec spec;
    spec.schemes = parse_schemes(o.schemes);
    spec.delta = o.delta;
    spec.k_lo = o.k_lo;
    spec.k_hi = o.k_hi;
    spec.n = o.n;
    spec.model = model;
    spec.T = o.T;
    spec.refine = o.refine;
    spec.validate();
    manifest["schemes"] = scheme_names(spec.schemes);
    manifest["delta"] = spec.delta;
    manifest["k"] = {spec.k_lo, spec.k_hi};
    manifest["grid"] = {{"n", spec.n}, {"lower", spec.lower}, {"upper", spec.upper}};
    manifest["reference"] = {{"scheme", "EFRK(3,3)"}, {"kappa", 0.0}, {"refine", spec.refine}};
    write_json(dir / "manifest.json", manifest);

    const auto res = converge_time(spec);
    CsvWriter csv(dir / "converge_time.csv", {"scheme", "k", "tau", "error", "order"});
    std::printf("reference tau = %.6e\n%-10s %3s %12s %12s %7s\n", res.reference_tau, "scheme",
                "k", "tau", "error", "order");
    for (const auto& r : res.rows) {
      csv.write_row({r.scheme, std::to_string(r.k), fmt_double(r.tau), fmt_double(r.error),
                     r.order ? fmt_double(*r.order) : std::string()});
      std::printf("%-10s %3d %12.4e %12.4e %7s\n", r.scheme.c_str(), r.k, r.tau, r.error,
                  r.order ? std::to_string(*r.order).substr(0, 5).c_str() : "-");
    }
  } else if (o.mode == "space") {
    ConvergeSpaceSpec spec;
    spec.scheme = parse_scheme(o.schemes.empty() ? "EFRK33" : o.schemes.back());
    spec.p_lo = o.p_lo;
    spec.p_hi = o.p_hi;
    spec.p_ref = o.p_ref;
    spec.tau = o.tau.value_or(o.delta / 4096.0);
    spec.model = model;
    spec.T = o.T;
    spec.validate();
    manifest["scheme"] = spec.scheme.label();
    manifest["tau"] = spec.tau;
    manifest["p"] = {spec.p_lo, spec.p_hi};
    manifest["p_ref"] = spec.p_ref;
    write_json(dir / "manifest.json", manifest);

    const auto rows = converge_space(spec);
    CsvWriter csv(dir / "converge_space.csv", {"n", "error"});
    std::printf("%6s %12s\n", "N", "error");
    for (const auto& r : rows) {
      csv.write_row({std::to_string(r.n), fmt_double(r.error)});
      std::printf("%6d %12.4e\n", r.n, r.error);
    }
  } else {
    throw ValidationError("converge --mode: expected 'time' or 'space'");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EquilibriumOptions {
  std::vector<std::string> schemes;
  int n = 2048;
  double epsilon2 = 0.0004, kappa = 0.0, tau = 5e-4, tau_lt = 1e-4, T = 0.02;
  std::string output = "out/equilibrium";
};

int cmd_equilibrium(const EquilibriumOptions& o) {
  EquilibriumSpec spec;
  if (!o.schemes.empty()) spec.schemes = parse_schemes(o.schemes);
  spec.n = o.n;
  spec.model.epsilon2 = o.epsilon2;
  spec.model.kappa = o.kappa;
  spec.tau = o.tau;
  spec.tau_lie_trotter = o.tau_lt;
  spec.T = o.T;
  warn_model(spec.model);
  const fs::path dir = prepare_dir(o.output);
  json manifest;
  manifest["command"] = "equilibrium";
  manifest["schemes"] = scheme_names(spec.schemes);
  manifest["grid"] = {{"n", spec.n}, {"lower", spec.lower}, {"upper", spec.upper}};
  manifest["model"] = model_json(spec.model);
  manifest["tau"] = spec.tau;
  manifest["tau_lie_trotter"] = spec.tau_lie_trotter;
  manifest["T"] = spec.T;
  manifest["initial"] = {{"type", "tanh"}};
  write_json(dir / "manifest.json", manifest);

  const auto results = equilibrium(spec);
  CsvWriter summary(dir / "summary.csv",
                    {"scheme", "tau", "drift_linf", "energy_initial", "energy_final"});
  std::printf("%-12s %10s %14s %22s %22s\n", "scheme", "tau", "drift_linf", "E(0)", "E(T)");
  for (const auto& r : results) {
    const std::string tag = file_label(r.scheme);
    summary.write_row({r.scheme, fmt_double(r.tau), fmt_double(r.drift_linf),
                       fmt_double(r.energy_initial), fmt_double(r.energy_final)});
    std::printf("%-12s %10.2e %14.6e %22.15e %22.15e\n", r.scheme.c_str(), r.tau, r.drift_linf,
                r.energy_initial, r.energy_final);
    CsvWriter prof(dir / ("profile_" + tag + ".csv"), {"x", "u0", "uT", "abs_diff"});
    for (std::size_t i = 0; i < r.final_state.size(); ++i)
      prof.write_row({fmt_double(r.final_state.grid.coordinate(0, static_cast<int>(i))),
                      fmt_double(r.initial.values[i]), fmt_double(r.final_state.values[i]),
                      fmt_double(std::abs(r.final_state.values[i] - r.initial.values[i]))});
    write_series(dir / ("series_" + tag + ".csv"), r.series);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BoxOptions {
  std::vector<std::string> schemes;
  std::vector<double> taus;
  std::optional<double> T;
  int n = 128;
  std::optional<double> epsilon2;
  double kappa = 2.0;
  std::uint64_t seed = 20240501;
  std::optional<std::vector<double>> snapshots;
  int refine = 0;
  double alpha = 100.0, tau_min = 1e-5, tau_max = 1e-2;
  std::string output;
};

json box_manifest(const std::string& command, const std::vector<LabeledRun>& runs, int refine) {
  json m;
  m["command"] = command;
  json list = json::array();
  for (const auto& r : runs) list.push_back({{"label", r.label}, {"config", run_config_json(r.config)}});
  m["runs"] = list;
  m["reference_refine"] = refine;
  m["workers"] = worker_count();
  return m;
}

std::optional<ReferenceTrajectory> box_reference(const RunConfig& base, int refine) {
  if (refine <= 0) return std::nullopt;
  return reference_trajectory(base, refine, base.snapshot_times);
}

void finish_box(const fs::path& dir, const std::vector<LabeledResult>& results) {
  CsvWriter summary(dir / "summary.csv", run_summary_header());
  for (const auto& r : results) {
    summary.write_row(run_summary_row(r));
    write_run_outputs(dir / r.label, r);
  }
  print_run_summary(results);
}

int cmd_coarsen2d(const BoxOptions& o) {
  RunConfig base = coarsening_config(o.n, o.T.value_or(100.0));
  if (o.epsilon2) base.model.epsilon2 = *o.epsilon2;
  base.model.kappa = o.kappa;
  base.seed = o.seed;
  base.snapshot_times = o.snapshots.value_or(std::vector<double>{});
  warn_model(base.model);
  const auto schemes = parse_schemes(
      o.schemes.empty() ? std::vector<std::string>{"EFRK11", "EFRK22", "EFRK33", "IFRK33"}
                        : o.schemes);
  const auto taus = o.taus.empty() ? std::vector<double>{1e-3} : o.taus;
  auto runs = coarsening_runs(base, schemes, taus);
  for (auto& r : runs) r.config.validate();
  const fs::path dir = prepare_dir(o.output.empty() ? "out/coarsen2d" : o.output);
  write_json(dir / "manifest.json", box_manifest("coarsen2d", runs, o.refine));
  RunConfig ref_base = base;
  ref_base.tau = *std::min_element(taus.begin(), taus.end());
  const auto ref = box_reference(ref_base, o.refine);
  finish_box(dir, run_all(runs, ref ? &*ref : nullptr));
  return kExitOk;
}

int cmd_adapt(const BoxOptions& o) {
  RunConfig base = coarsening_config(o.n, o.T.value_or(1.0));
  if (o.epsilon2) base.model.epsilon2 = *o.epsilon2;
  base.model.kappa = o.kappa;
  base.seed = o.seed;
  base.scheme = parse_scheme(o.schemes.empty() ? "EFRK33" : o.schemes.front());
  base.snapshot_times = o.snapshots.value_or(std::vector<double>{});
  warn_model(base.model);
  AdaptiveParams ap{o.alpha, o.tau_min, o.tau_max};
  ap.validate();
  const auto runs = adaptive_runs(base, ap);
  for (const auto& r : runs) r.config.validate();
  const fs::path dir = prepare_dir(o.output.empty() ? "out/adapt" : o.output);
  write_json(dir / "manifest.json", box_manifest("adapt", runs, 0));
  const auto results = run_all(runs);
  finish_box(dir, results);
  CsvWriter diff(dir / "final_difference.csv", {"run", "l2_diff_vs_fine", "steps_ratio_fine_over_run"});
  const auto& fine = results[1];
  for (const auto& r : results) {
    const double d = distance_l2(r.result.final_state, fine.result.final_state);
    const double ratio = static_cast<double>(fine.stats.steps) / static_cast<double>(r.stats.steps);
    diff.write_row({r.label, fmt_double(d), fmt_double(ratio)});
    std::printf("%-28s l2 diff vs fine = %.4e, step ratio = %.2f\n", r.label.c_str(), d, ratio);
  }
  return kExitOk;
}

int cmd_compare(const BoxOptions& o) {
  RunConfig base = comparison_config(o.n, o.T.value_or(50.0));
  if (o.epsilon2) base.model.epsilon2 = *o.epsilon2;
  base.model.kappa = o.kappa;
  base.seed = o.seed;
  base.adaptive = AdaptiveParams{o.alpha, o.tau_min, o.tau_max};
  std::vector<double> snaps = o.snapshots.value_or(std::vector<double>{1, 4, 10, 30, 50});
  std::erase_if(snaps, [&](double s) { return s > base.T; });
  base.snapshot_times = snaps;
  warn_model(base.model);
  const auto schemes = parse_schemes(
      o.schemes.empty() ? std::vector<std::string>{"EFRK22", "EFRK33", "IFRK33"} : o.schemes);
  std::vector<LabeledRun> runs;
  for (const auto& s : schemes) {
    RunConfig c = base;
    c.scheme = s;
    c.validate();
    runs.push_back({file_label(s.label()) + "_adaptive", c});
  }
  const fs::path dir = prepare_dir(o.output.empty() ? "out/compare" : o.output);
  write_json(dir / "manifest.json", box_manifest("compare", runs, o.refine));
  const auto ref = box_reference(base, o.refine);
  finish_box(dir, run_all(runs, ref ? &*ref : nullptr));
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct StabilityOptions {
  std::vector<int> stages{1, 2, 3};
  std::vector<double> thetas{0.0, 0.25, 0.5, 0.6};
  std::vector<double> window{-6.0, 2.0, -4.0, 4.0};
  int resolution = 400;
  std::size_t psd_samples = 1000;
  std::string output = "out/stability";
};

int cmd_stability(const StabilityOptions& o) {
  if (o.window.size() != 4 || !(o.window[0] < o.window[1]) || !(o.window[2] < o.window[3]))
    throw ValidationError("stability --window: expected re_min,re_max,im_min,im_max");
  for (int s : o.stages)
    if (s < 1 || s > 3) throw ValidationError("stability --s: stages must be 1, 2 or 3");
  const Window win{o.window[0], o.window[1], o.window[2], o.window[3]};
  const fs::path dir = prepare_dir(o.output);
  json manifest;
  manifest["command"] = "stability";
  manifest["s"] = o.stages;
  manifest["theta"] = o.thetas;
  manifest["window"] = o.window;
  manifest["resolution"] = o.resolution;
  manifest["psd_samples"] = o.psd_samples;
  manifest["plane"] = "w = -z; theta = 0 gives |phi_s(w)| <= 1";
  write_json(dir / "manifest.json", manifest);

  std::vector<std::pair<int, double>> jobs;
  for (int s : o.stages)
    for (double th : o.thetas) jobs.emplace_back(s, th);
  std::vector<BoundaryData> data(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    data[i] = stability_data(jobs[i].first, jobs[i].second, o.resolution, win);
  });

  CsvWriter amp(dir / "amplification.csv", {"s", "theta", "max_left_half_plane", "curves"});
  for (const auto& b : data) {
    char name[64];
    std::snprintf(name, sizeof name, "boundary_s%d_theta%g.csv", b.s, b.theta);
    CsvWriter csv(dir / name, {"curve", "re", "im"});
    for (std::size_t c = 0; c < b.lines.size(); ++c)
      for (const auto& p : b.lines[c])
        csv.write_row({std::to_string(c), fmt_double(p.real()), fmt_double(p.imag())});
    amp.write_row({std::to_string(b.s), fmt_double(b.theta), fmt_double(b.max_left_half_plane),
                   std::to_string(b.lines.size())});
    std::printf("s=%d theta=%-5g max|Phi| (Re w <= 0) = %.15f, %zu curve(s)\n", b.s, b.theta,
                b.max_left_half_plane, b.lines.size());
  }

  CsvWriter psd(dir / "psd_scan.csv", {"tableau", "min_value", "argmin_z", "argmin_entry", "samples"});
  for (const char* name : {"RK11", "RK22", "RK33"}) {
    const auto scan = scan_energy_matrices(builtin_tableau(name), o.psd_samples);
    psd.write_row({name, fmt_double(scan.min_value), fmt_double(scan.argmin_z), scan.argmin_entry,
                   std::to_string(scan.samples)});
    std::printf("%s energy-matrix minimum %.6e at z = %.3e (%s)\n", name, scan.min_value,
                scan.argmin_z, scan.argmin_entry.c_str());
  }
  return kExitOk;
}

void add_box_options(CLI::App* cmd, BoxOptions& o, bool uniform_taus, bool adaptive) {
  cmd->add_option("--schemes", o.schemes, "Scheme names")->delimiter(',');
  if (uniform_taus) cmd->add_option("--tau", o.taus, "Uniform step sizes")->delimiter(',');
  cmd->add_option("--T", o.T, "Final time");
  cmd->add_option("--n", o.n, "Points per dimension");
  cmd->add_option("--epsilon2", o.epsilon2, "Interface parameter");
  cmd->add_option("--kappa", o.kappa, "Stabilization parameter");
  cmd->add_option("--seed", o.seed, "Seed for the random initial data");
  cmd->add_option("--snapshots", o.snapshots, "Snapshot times")->delimiter(',');
  cmd->add_option("--output", o.output, "Output directory");
  if (adaptive) {
    cmd->add_option("--alpha", o.alpha, "Adaptivity gain");
    cmd->add_option("--tau-min", o.tau_min, "Smallest step");
    cmd->add_option("--tau-max", o.tau_max, "Largest step");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential-free Runge-Kutta solver for the Cahn-Hilliard equation"};
  app.require_subcommand(1);

  RunOptions run_o;
  auto* run_cmd = app.add_subcommand("run", "Run one simulation from a JSON config");
  run_cmd->add_option("config", run_o.config, "Config file")->required();
  run_cmd->add_option("--scheme", run_o.scheme, "Scheme, e.g. EFRK33, IFRK22, LieTrotter, Strang");
  run_cmd->add_option("--tau", run_o.tau, "Uniform step size");
  run_cmd->add_option("--T", run_o.T, "Final time");
  run_cmd->add_option("--kappa", run_o.kappa, "Stabilization parameter");
  run_cmd->add_option("--epsilon2", run_o.epsilon2, "Interface parameter");
  run_cmd->add_option("--seed", run_o.seed, "Seed for random initial data");
  run_cmd->add_option("--reference-refine", run_o.refine, "Self-reference refinement (>= 4)");
  run_cmd->add_option("--output", run_o.output, "Output directory");

  ConvergeOptions conv_o;
  auto* conv_cmd = app.add_subcommand("converge", "Temporal or spatial convergence study");
  conv_cmd->add_option("--mode", conv_o.mode, "time or space");
  conv_cmd->add_option("--schemes", conv_o.schemes, "Schemes")->delimiter(',');
  conv_cmd->add_option("--delta", conv_o.delta, "Base step");
  conv_cmd->add_option("--k-lo", conv_o.k_lo, "Smallest k in tau = delta / 2^k");
  conv_cmd->add_option("--k-hi", conv_o.k_hi, "Largest k");
  conv_cmd->add_option("--n", conv_o.n, "Grid points");
  conv_cmd->add_option("--refine", conv_o.refine, "Reference refinement beyond k-hi");
  conv_cmd->add_option("--p-lo", conv_o.p_lo, "Smallest log2 N (space mode)");
  conv_cmd->add_option("--p-hi", conv_o.p_hi, "Largest log2 N (space mode)");
  conv_cmd->add_option("--p-ref", conv_o.p_ref, "Reference log2 N (space mode)");
  conv_cmd->add_option("--tau", conv_o.tau, "Step size (space mode)");
  conv_cmd->add_option("--epsilon2", conv_o.epsilon2, "Interface parameter");
  conv_cmd->add_option("--kappa", conv_o.kappa, "Stabilization parameter");
  conv_cmd->add_option("--T", conv_o.T, "Final time");
  conv_cmd->add_option("--output", conv_o.output, "Output directory");

  EquilibriumOptions eq_o;
  auto* eq_cmd = app.add_subcommand("equilibrium", "Equilibrium preservation from a tanh profile");
  eq_cmd->add_option("--schemes", eq_o.schemes, "Schemes")->delimiter(',');
  eq_cmd->add_option("--n", eq_o.n, "Grid points");
  eq_cmd->add_option("--epsilon2", eq_o.epsilon2, "Interface parameter");
  eq_cmd->add_option("--kappa", eq_o.kappa, "Stabilization parameter");
  eq_cmd->add_option("--tau", eq_o.tau, "Step size");
  eq_cmd->add_option("--tau-lie-trotter", eq_o.tau_lt, "Step size for Lie-Trotter");
  eq_cmd->add_option("--T", eq_o.T, "Final time");
  eq_cmd->add_option("--output", eq_o.output, "Output directory");

  BoxOptions coarsen_o, adapt_o, compare_o;
  auto* coarsen_cmd = app.add_subcommand("coarsen2d", "2D coarsening from random data");
  add_box_options(coarsen_cmd, coarsen_o, true, false);
  coarsen_cmd->add_option("--reference-refine", coarsen_o.refine, "Self-reference refinement");
  auto* adapt_cmd = app.add_subcommand("adapt", "Adaptive against uniform stepping");
  add_box_options(adapt_cmd, adapt_o, false, true);
  auto* compare_cmd = app.add_subcommand("compare", "Adaptive runs of several schemes");
  add_box_options(compare_cmd, compare_o, false, true);
  compare_cmd->add_option("--reference-refine", compare_o.refine, "Self-reference refinement");

  StabilityOptions stab_o;
  auto* stab_cmd = app.add_subcommand("stability", "Stability boundaries and energy-matrix scans");
  stab_cmd->add_option("--s", stab_o.stages, "Stage counts")->delimiter(',');
  stab_cmd->add_option("--theta", stab_o.thetas, "Stabilization ratios")->delimiter(',');
  stab_cmd->add_option("--window", stab_o.window, "re_min,re_max,im_min,im_max")->delimiter(',');
  stab_cmd->add_option("--resolution", stab_o.resolution, "Lattice size per axis");
  stab_cmd->add_option("--psd-samples", stab_o.psd_samples, "Samples in z");
  stab_cmd->add_option("--output", stab_o.output, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run_cmd) return cmd_run(run_o);
    if (*conv_cmd) return cmd_converge(conv_o);
    if (*eq_cmd) return cmd_equilibrium(eq_o);
    if (*coarsen_cmd) return cmd_coarsen2d(coarsen_o);
    if (*adapt_cmd) return cmd_adapt(adapt_o);
    if (*compare_cmd) return cmd_compare(compare_o);
    if (*stab_cmd) return cmd_stability(stab_o);
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << " (t = " << e.time() << ", stage "
              << e.stage() << ")\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
