#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "efrk/diagnostics.hpp"
#include "efrk/driver.hpp"
#include "efrk/error.hpp"
#include "efrk/spectral.hpp"

namespace efrk {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Shortest round-trippable decimal form of a double.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

/// Writes rows with a fixed header; every row must have the header's width.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, std::vector<std::string> header)
      : out_(path), width_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

inline const std::vector<std::string>& series_header() {
  static const std::vector<std::string> h{"step", "t", "tau", "energy", "mass", "err_l2", "cpu_s"};
  return h;
}

inline std::vector<std::string> series_row(const TimeSeriesRecord& r) {
  return {std::to_string(r.step), fmt_double(r.t), fmt_double(r.tau), fmt_double(r.energy),
          fmt_double(r.mass), r.err_l2 ? fmt_double(*r.err_l2) : std::string(),
          fmt_double(r.cpu_s)};
}

inline void write_series(const fs::path& path, const std::vector<TimeSeriesRecord>& rows) {
  CsvWriter w(path, series_header());
  for (const auto& r : rows) w.write_row(series_row(r));
}

/// Reads a CSV written by CsvWriter into header + string cells.
inline std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// EFRKSNAP snapshots
//
//   8 bytes  "EFRKSNAP"
//   u32      version (1)
//   u32      d
//   u32 x d  N_k
//   f64 x 2d a_k, b_k for each k
//   f64      t
//   f64 x N  values in grid flattening order
// All integers and floats little-endian.

inline constexpr char kSnapMagic[8] = {'E', 'F', 'R', 'K', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T)))
    throw ValidationError("snapshot: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline json snapshot_header_json(const Grid& g, double t) {
  json h;
  h["magic"] = "EFRKSNAP";
  h["version"] = kSnapVersion;
  h["dim"] = g.dim();
  json n = json::array(), lo = json::array(), hi = json::array();
  for (int k = 0; k < g.dim(); ++k) {
    n.push_back(g.points(k));
    lo.push_back(g.lower(k));
    hi.push_back(g.upper(k));
  }
  h["n"] = n;
  h["lower"] = lo;
  h["upper"] = hi;
  h["t"] = t;
  h["count"] = g.size();
  h["data_offset"] = 16 + 4 * g.dim() + 16 * g.dim() + 8;
  h["byte_order"] = "little";
  return h;
}

/// Writes `path` and a JSON sidecar `path` + ".json" duplicating the header.
inline void write_snapshot(const fs::path& path, const RealField& u, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const Grid& g = u.grid;
  out.write(kSnapMagic, sizeof kSnapMagic);
  detail::put_le<std::uint32_t>(out, kSnapVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (int k = 0; k < g.dim(); ++k)
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points(k)));
  for (int k = 0; k < g.dim(); ++k) {
    detail::put_le<double>(out, g.lower(k));
    detail::put_le<double>(out, g.upper(k));
  }
  detail::put_le<double>(out, t);
  for (double v : u.values) detail::put_le<double>(out, v);
  if (!out) throw std::runtime_error("write failed: " + path.string());

  std::ofstream side(path.string() + ".json");
  side << snapshot_header_json(g, t).dump(2) << '\n';
}

struct LoadedSnapshot {
  RealField field;
  double t;
};

inline LoadedSnapshot read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("snapshot: cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kSnapMagic, 8) != 0)
    throw ValidationError("snapshot: bad magic in " + path.string());
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kSnapVersion)
    throw ValidationError("snapshot: unsupported version " + std::to_string(version));
  const auto d = static_cast<int>(detail::get_le<std::uint32_t>(in));
  if (d < 1 || d > Grid::kMaxDim) throw ValidationError("snapshot: bad dimension");
  std::vector<int> n(d);
  std::vector<double> a(d), b(d);
  for (int k = 0; k < d; ++k) n[k] = static_cast<int>(detail::get_le<std::uint32_t>(in));
  for (int k = 0; k < d; ++k) {
    a[k] = detail::get_le<double>(in);
    b[k] = detail::get_le<double>(in);
  }
  const Grid g = make_grid(d, n, a, b);
  const double t = detail::get_le<double>(in);
  RealField u(g);
  for (auto& v : u.values) v = detail::get_le<double>(in);
  if (in.peek() != std::char_traits<char>::eof())
    throw ValidationError("snapshot: trailing bytes in " + path.string());
  return {std::move(u), t};
}

// ---------------------------------------------------------------------------
// Run configuration (JSON). Unknown keys are rejected.

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                           const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ValidationError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

template <class T>
std::vector<T> get_vec(const json& obj, const char* key, int dim, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + "." + key + ": missing");
  const json& v = obj.at(key);
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return std::vector<T>(static_cast<std::size_t>(dim), v.get<T>());
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

}  // namespace detail

inline std::string initial_kind_name(InitialKind k) {
  switch (k) {
    case InitialKind::Sines: return "sines";
    case InitialKind::Tanh: return "tanh";
    case InitialKind::Random: return "random";
    case InitialKind::Constant: return "constant";
    case InitialKind::Field: return "snapshot";
  }
  return "?";
}

/// Parsed configuration plus the fields that only the CLI uses.
struct ConfigFile {
  RunConfig run;
  int reference_refine = 0;  // 0: no reference
  std::string output = "out";
  std::string initial_path;  // for "snapshot" initial data
};

inline ConfigFile parse_config(const json& j) {
  using detail::get_or;
  detail::reject_unknown(j, {"grid", "model", "scheme", "tau", "adaptive", "T", "snapshots",
                             "seed", "initial", "reference_refine", "output"},
                         "config");
  ConfigFile cf;
  RunConfig& rc = cf.run;

  if (!j.contains("grid")) throw ValidationError("config.grid: missing");
  const json& g = j.at("grid");
  detail::reject_unknown(g, {"dim", "n", "lower", "upper"}, "grid");
  const int dim = get_or<int>(g, "dim", 1, "grid");
  rc.grid = make_grid(dim, detail::get_vec<int>(g, "n", dim, "grid"),
                      detail::get_vec<double>(g, "lower", dim, "grid"),
                      detail::get_vec<double>(g, "upper", dim, "grid"));

  if (j.contains("model")) {
    const json& m = j.at("model");
    detail::reject_unknown(m, {"epsilon2", "kappa", "beta", "truncate"}, "model");
    rc.model.epsilon2 = get_or<double>(m, "epsilon2", rc.model.epsilon2, "model");
    rc.model.kappa = get_or<double>(m, "kappa", rc.model.kappa, "model");
    rc.model.beta = get_or<double>(m, "beta", rc.model.beta, "model");
    rc.model.truncate = get_or<bool>(m, "truncate", rc.model.truncate, "model");
  }
  rc.scheme = parse_scheme(get_or<std::string>(j, "scheme", "EFRK33", "config"));
  if (j.contains("tau") && j.contains("adaptive"))
    throw ValidationError("config: give either tau or adaptive, not both");
  rc.tau = get_or<double>(j, "tau", rc.tau, "config");
  if (j.contains("adaptive")) {
    const json& a = j.at("adaptive");
    detail::reject_unknown(a, {"alpha", "tau_min", "tau_max"}, "adaptive");
    AdaptiveParams ap;
    ap.alpha = get_or<double>(a, "alpha", ap.alpha, "adaptive");
    ap.tau_min = get_or<double>(a, "tau_min", ap.tau_min, "adaptive");
    ap.tau_max = get_or<double>(a, "tau_max", ap.tau_max, "adaptive");
    rc.adaptive = ap;
  }
  rc.T = get_or<double>(j, "T", rc.T, "config");
  rc.snapshot_times = get_or<std::vector<double>>(j, "snapshots", {}, "config");
  rc.seed = get_or<std::uint64_t>(j, "seed", rc.seed, "config");
  cf.reference_refine = get_or<int>(j, "reference_refine", 0, "config");
  cf.output = get_or<std::string>(j, "output", cf.output, "config");

  if (j.contains("initial")) {
    const json& ic = j.at("initial");
    detail::reject_unknown(ic, {"type", "low", "high", "value", "path"}, "initial");
    const auto type = get_or<std::string>(ic, "type", "sines", "initial");
    auto& init = rc.initial;
    if (type == "sines") init.kind = InitialKind::Sines;
    else if (type == "tanh") init.kind = InitialKind::Tanh;
    else if (type == "random") init.kind = InitialKind::Random;
    else if (type == "constant") init.kind = InitialKind::Constant;
    else if (type == "snapshot") init.kind = InitialKind::Field;
    else throw ValidationError("initial.type: unknown '" + type + "'");
    init.low = get_or<double>(ic, "low", init.low, "initial");
    init.high = get_or<double>(ic, "high", init.high, "initial");
    init.value = get_or<double>(ic, "value", init.value, "initial");
    cf.initial_path = get_or<std::string>(ic, "path", "", "initial");
    if (init.kind == InitialKind::Field) {
      if (cf.initial_path.empty()) throw ValidationError("initial.path: required for snapshot");
      auto snap = read_snapshot(cf.initial_path);
      require_same_grid(snap.field.grid, rc.grid, "initial snapshot");
      init.field = std::move(snap.field);
      init.t0 = snap.t;
    }
  }
  if (cf.reference_refine != 0 && cf.reference_refine < 4)
    throw ValidationError("config.reference_refine: must be 0 or >= 4");
  rc.validate();
  return cf;
}

inline ConfigFile load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  return parse_config(j);
}

/// The fully resolved configuration, defaults filled in. Parsing this object
/// again yields the same RunConfig.
inline json resolved_config(const ConfigFile& cf) {
  const RunConfig& rc = cf.run;
  json j;
  json g;
  g["dim"] = rc.grid.dim();
  json n = json::array(), lo = json::array(), hi = json::array();
  for (int k = 0; k < rc.grid.dim(); ++k) {
    n.push_back(rc.grid.points(k));
    lo.push_back(rc.grid.lower(k));
    hi.push_back(rc.grid.upper(k));
  }
  g["n"] = n;
  g["lower"] = lo;
  g["upper"] = hi;
  j["grid"] = g;
  j["model"] = {{"epsilon2", rc.model.epsilon2},
                {"kappa", rc.model.kappa},
                {"beta", rc.model.beta},
                {"truncate", rc.model.truncate}};
  std::string scheme;
  switch (rc.scheme.kind) {
    case SchemeKind::EFRK: scheme = "EFRK"; break;
    case SchemeKind::IFRK: scheme = "IFRK"; break;
    case SchemeKind::LieTrotter: scheme = "LieTrotter"; break;
    case SchemeKind::Strang: scheme = "Strang"; break;
  }
  if (rc.scheme.kind == SchemeKind::EFRK || rc.scheme.kind == SchemeKind::IFRK)
    scheme += rc.scheme.tableau.name().substr(2);
  j["scheme"] = scheme;
  if (rc.adaptive)
    j["adaptive"] = {{"alpha", rc.adaptive->alpha},
                     {"tau_min", rc.adaptive->tau_min},
                     {"tau_max", rc.adaptive->tau_max}};
  else
    j["tau"] = rc.tau;
  j["T"] = rc.T;
  j["snapshots"] = rc.snapshot_times;
  j["seed"] = rc.seed;
  json ic;
  ic["type"] = initial_kind_name(rc.initial.kind);
  if (rc.initial.kind == InitialKind::Random) {
    ic["low"] = rc.initial.low;
    ic["high"] = rc.initial.high;
  }
  if (rc.initial.kind == InitialKind::Constant) ic["value"] = rc.initial.value;
  if (rc.initial.kind == InitialKind::Field) ic["path"] = cf.initial_path;
  j["initial"] = ic;
  j["reference_refine"] = cf.reference_refine;
  j["output"] = cf.output;
  return j;
}

}  // namespace efrk
