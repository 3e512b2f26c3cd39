#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "efrk/io.hpp"

namespace {

using namespace efrk;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "efrk_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<unsigned char> bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <class T>
T read_le(const std::vector<unsigned char>& b, std::size_t off) {
  // Little-endian decode by shifts, independent of the host byte order.
  std::uint64_t bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) bits |= std::uint64_t(b.at(off + k)) << (8 * k);
  if constexpr (sizeof(T) == 4) {
    return static_cast<T>(bits);
  } else {
    T v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
}

json minimal_config() {
  return json::parse(R"({"grid": {"n": 32, "lower": -1, "upper": 1}})");
}

TEST(Csv, SeriesHeaderAndRows) {
  const fs::path p = scratch("series.csv");
  std::vector<TimeSeriesRecord> rows(2);
  rows[1].step = 1;
  rows[1].t = 0.1;
  rows[1].tau = 0.1;
  rows[1].energy = 1.0 / 3.0;
  rows[1].mass = -2.5e-17;
  rows[1].err_l2 = 1e-9;
  rows[1].cpu_s = 0.5;
  write_series(p, rows);
  const auto table = read_csv(p);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0], (std::vector<std::string>{"step", "t", "tau", "energy", "mass", "err_l2",
                                                 "cpu_s"}));
  EXPECT_EQ(table[1][5], "");
  EXPECT_EQ(table[2][0], "1");
  EXPECT_EQ(std::stod(table[2][3]), 1.0 / 3.0);
  EXPECT_EQ(std::stod(table[2][4]), -2.5e-17);
  EXPECT_EQ(std::stod(table[2][5]), 1e-9);
}

TEST(Csv, RowWidthIsChecked) {
  CsvWriter w(scratch("w.csv"), {"a", "b"});
  EXPECT_THROW(w.write_row({"1"}), std::logic_error);
}

TEST(Snapshot, ByteLayout) {
  const Grid g = make_grid(2, std::vector<int>{4, 6}, std::vector<double>{-1.0, 0.0},
                           std::vector<double>{1.0, 3.0});
  RealField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.25 * static_cast<double>(i) - 1.0;
  const fs::path p = scratch("layout.efrksnap");
  write_snapshot(p, u, 2.5);
  const auto b = bytes_of(p);
  const std::size_t header = 8 + 4 + 4 + 2 * 4 + 2 * 16 + 8;
  ASSERT_EQ(b.size(), header + 8 * u.size());
  EXPECT_EQ(std::string(b.begin(), b.begin() + 8), "EFRKSNAP");
  EXPECT_EQ(read_le<std::uint32_t>(b, 8), 1u);
  EXPECT_EQ(read_le<std::uint32_t>(b, 12), 2u);
  EXPECT_EQ(read_le<std::uint32_t>(b, 16), 4u);
  EXPECT_EQ(read_le<std::uint32_t>(b, 20), 6u);
  EXPECT_EQ(read_le<double>(b, 24), -1.0);
  EXPECT_EQ(read_le<double>(b, 32), 1.0);
  EXPECT_EQ(read_le<double>(b, 40), 0.0);
  EXPECT_EQ(read_le<double>(b, 48), 3.0);
  EXPECT_EQ(read_le<double>(b, 56), 2.5);
  // First dimension fastest.
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(read_le<double>(b, header + 8 * i), u[i]);

  std::ifstream side(p.string() + ".json");
  const json h = json::parse(side);
  EXPECT_EQ(h["magic"], "EFRKSNAP");
  EXPECT_EQ(h["data_offset"].get<std::size_t>(), header);
  EXPECT_EQ(h["count"].get<std::size_t>(), u.size());
  EXPECT_EQ(h["n"], json::array({4, 6}));
  EXPECT_EQ(h["t"].get<double>(), 2.5);
}

TEST(Snapshot, RoundTripIsBitExact) {
  const Grid g = make_grid_uniform(3, 4, 0.0, 1.0);
  RealField u = random_field(g, 11, -1.0, 1.0);
  u[0] = -0.0;
  u[1] = 1e-308;
  const fs::path p = scratch("rt.efrksnap");
  write_snapshot(p, u, 0.1);
  const LoadedSnapshot s = read_snapshot(p);
  EXPECT_EQ(s.t, 0.1);
  EXPECT_EQ(s.field.grid.dim(), 3);
  ASSERT_EQ(s.field.size(), u.size());
  EXPECT_EQ(std::memcmp(s.field.values.data(), u.values.data(), 8 * u.size()), 0);
}

TEST(Snapshot, RejectsCorruptFiles) {
  const fs::path p = scratch("bad.efrksnap");
  write_snapshot(p, RealField(make_grid_1d(8, 0.0, 1.0), 1.0), 0.0);
  auto b = bytes_of(p);

  auto dump = [&](const std::vector<unsigned char>& v) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
  };
  auto bad = b;
  bad[0] = 'X';
  dump(bad);
  EXPECT_THROW(read_snapshot(p), ValidationError);
  bad = b;
  bad[8] = 2;
  dump(bad);
  EXPECT_THROW(read_snapshot(p), ValidationError);
  bad = b;
  bad.resize(b.size() - 3);
  dump(bad);
  EXPECT_THROW(read_snapshot(p), ValidationError);
  bad = b;
  bad.push_back(0);
  dump(bad);
  EXPECT_THROW(read_snapshot(p), ValidationError);
  EXPECT_THROW(read_snapshot(scratch("missing.efrksnap")), ValidationError);
}

TEST(Config, DefaultsAreFilledIn) {
  const ConfigFile cf = parse_config(minimal_config());
  EXPECT_EQ(cf.run.model.kappa, 2.0);
  EXPECT_DOUBLE_EQ(cf.run.model.beta, std::sqrt(15.0) / 3.0);
  EXPECT_TRUE(cf.run.model.truncate);
  EXPECT_EQ(cf.run.scheme.label(), "EFRK(3,3)");
  EXPECT_EQ(cf.reference_refine, 0);
  const json r = resolved_config(cf);
  EXPECT_EQ(r["model"]["kappa"], 2.0);
  EXPECT_EQ(r["model"]["truncate"], true);
  EXPECT_EQ(r["scheme"], "EFRK33");
}

TEST(Config, ResolvedConfigRoundTrips) {
  json j = minimal_config();
  j["grid"] = json::parse(R"({"dim": 2, "n": [16, 8], "lower": 0, "upper": [6.0, 3.0]})");
  j["scheme"] = "IFRK22";
  j["adaptive"] = {{"alpha", 50.0}, {"tau_max", 0.02}};
  j["T"] = 1.5;
  j["snapshots"] = {0.5, 1.0};
  j["initial"] = {{"type", "random"}, {"low", -0.1}, {"high", 0.2}};
  j["seed"] = 7;
  j["reference_refine"] = 5;
  const ConfigFile a = parse_config(j);
  const json r = resolved_config(a);
  const ConfigFile b = parse_config(r);
  EXPECT_EQ(resolved_config(b), r);
  EXPECT_EQ(b.run.grid.points(1), 8);
  EXPECT_EQ(b.run.grid.lower(1), 0.0);
  EXPECT_EQ(b.run.adaptive->tau_min, 1e-5);
  EXPECT_EQ(b.run.adaptive->alpha, 50.0);
  EXPECT_EQ(b.run.initial.high, 0.2);
  EXPECT_EQ(b.run.seed, 7u);
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  for (const char* path : {"/extra", "/grid/extra", "/model/extra", "/initial/extra",
                           "/adaptive/extra"}) {
    json j = minimal_config();
    if (std::string(path).starts_with("/initial")) j["initial"] = json::object();
    if (std::string(path).starts_with("/model")) j["model"] = json::object();
    if (std::string(path).starts_with("/adaptive")) j["adaptive"] = json::object();
    j[json::json_pointer(path)] = 1;
    EXPECT_THROW(parse_config(j), ValidationError) << path;
  }
}

TEST(Config, RejectsInvalidValues) {
  auto with = [](const char* patch) {
    json j = minimal_config();
    j.merge_patch(json::parse(patch));
    return j;
  };
  EXPECT_THROW(parse_config(with(R"({"grid": {"n": 31}})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"grid": {"n": 2}})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"grid": {"lower": 1}})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"model": {"epsilon2": 0}})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"model": {"kappa": -1}})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"scheme": "EFRK44"})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"tau": 0})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"tau": 0.1, "adaptive": {}})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"reference_refine": 2})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"T": "long"})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"initial": {"type": "snapshot"}})")), ValidationError);
  EXPECT_THROW(parse_config(with(R"({"initial": {"type": "noise"}})")), ValidationError);
}

TEST(Config, SnapshotInitialData) {
  const Grid g = make_grid_1d(32, -1.0, 1.0);
  const fs::path p = scratch("init.efrksnap");
  write_snapshot(p, RealField(g, 0.3), 0.25);
  json j = minimal_config();
  j["initial"] = {{"type", "snapshot"}, {"path", p.string()}};
  j["T"] = 0.5;
  const ConfigFile cf = parse_config(j);
  EXPECT_EQ(cf.run.initial.t0, 0.25);
  EXPECT_EQ(cf.run.initial.field->values[5], 0.3);
  j["grid"]["n"] = 16;
  EXPECT_THROW(parse_config(j), ValidationError);
}

TEST(Config, LoadFileMapsParseErrors) {
  const fs::path p = scratch("broken.json");
  std::ofstream(p) << "{\"grid\": ";
  EXPECT_THROW(load_config(p), ValidationError);
  EXPECT_THROW(load_config(scratch("nope.json")), ValidationError);
  EXPECT_NO_THROW(load_config(EFRK_CONFIG_DIR "/sines_1d_efrk33.json"));
  EXPECT_NO_THROW(load_config(EFRK_CONFIG_DIR "/coarsening_2d_efrk33.json"));
  EXPECT_NO_THROW(load_config(EFRK_CONFIG_DIR "/adaptive_2d_efrk33.json"));
}

}  // namespace
