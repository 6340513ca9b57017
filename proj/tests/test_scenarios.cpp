#include "pnp/errors.hpp"
#include "pnp/scenarios.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pnp;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"j({
  "schema_version": 1,
  "name": "small",
  "geometry": { "inclusion": { "kind": "centered_square", "size": 0.5 }, "cell_resolution": 16,
                "resolution": 16, "epsilon": 0.25, "epsilons": [0.5, 0.25], "cells_per_period": 8 },
  "species": [
    { "name": "cation", "z": 1, "c0": "1 + 0.5*cos(pi*x1)" },
    { "name": "anion", "z": -1, "c0": "1 + 0.5*cos(pi*x2)" }
  ],
  "time": { "T": 0.01, "dt": 1e-3, "output_stride": 5 },
  "app": { "etas": [0.1, 0.01] },
  "converge": { "macro_resolution": 32 }
})j";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("reruns produce byte-identical outputs") {
  const auto cfg = parse_config(kSmall);
  TempDir dir("pnp_scen_det");
  for (const char* cmd : {"cell", "homog", "micro"}) {
    REQUIRE(orchestrate(cmd, cfg, {(dir.path / "a" / cmd).string(), 1}) == 0);
    REQUIRE(orchestrate(cmd, cfg, {(dir.path / "b" / cmd).string(), 1}) == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir.path / "a" / cmd)) {
      CHECK(slurp(e.path()) == slurp(dir.path / "b" / cmd / e.path().filename()));
      ++files;
    }
    CHECK(files > 0);
  }
  CHECK(orchestrate("check", cfg, {(dir.path / "a" / "homog").string(), 1}) == 0);
  CHECK(orchestrate("check", cfg, {(dir.path / "a" / "micro").string(), 1}) == 0);
}

TEST_CASE("cell command on an open cell writes the identity") {
  auto cfg = parse_config(R"j({"schema_version": 1, "geometry": {"cell_resolution": 16}})j");
  TempDir dir("pnp_scen_cell");
  REQUIRE(orchestrate("cell", cfg, {dir.path.string(), 1}) == 0);
  const auto t = CsvTable::read_file((dir.path / "cell.csv").string());
  REQUIRE(t.rows().size() == 1);
  CHECK(std::stod(t.rows()[0][t.column("a11")]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::stod(t.rows()[0][t.column("a12")])) < 1e-12);
}

TEST_CASE("check detects corrupted diagnostics and snapshots") {
  const auto cfg = parse_config(kSmall);
  TempDir dir("pnp_scen_check");
  REQUIRE(orchestrate("micro", cfg, {dir.path.string(), 1}) == 0);
  REQUIRE(orchestrate("check", cfg, {dir.path.string(), 1}) == 0);

  // Break mass conservation in one diagnostics row.
  const auto diag = dir.path / "micro_diagnostics.csv";
  const std::string original = slurp(diag);
  auto t = CsvTable::read_file(diag.string());
  auto rows = t.rows();
  CsvTable changed(t.header());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == 5) rows[r][t.column("mass")] = format_double(std::stod(rows[r][t.column("mass")]) * (1 + 1e-9));
    changed.add_row(rows[r]);
  }
  changed.write_file(diag.string());
  CHECK(orchestrate("check", cfg, {dir.path.string(), 1}) == 1);
  const auto report = CsvTable::read_file((dir.path / "check_report.csv").string());
  bool mass_failed = false;
  for (const auto& r : report.rows())
    if (r[report.column("check")] == "mass_conservation") mass_failed = r[report.column("status")] == "FAIL";
  CHECK(mass_failed);
  std::ofstream(diag, std::ios::binary) << original;
  CHECK(orchestrate("check", cfg, {dir.path.string(), 1}) == 0);

  // A negative concentration in a snapshot.
  const auto snap = dir.path / snapshot_name("micro", "cation", 5);
  std::string text = slurp(snap);
  const auto line2 = text.find('\n') + 1;
  text.replace(line2, text.find(' ', line2) - line2, "-1e-20");
  std::ofstream(snap, std::ios::binary) << text;
  CHECK(orchestrate("check", cfg, {dir.path.string(), 1}) == 1);
}

TEST_CASE("converge: errors shrink with epsilon and threads do not change results") {
  const auto cfg = parse_config(kSmall);
  const auto one = run_converge(cfg, 1);
  const auto two = run_converge(cfg, 2);
  REQUIRE(one.rows.size() == 2);
  CHECK(one.c_decreasing);
  CHECK(one.phi_decreasing);
  CHECK(one.two_scale_residual <= 1e-8);
  for (std::size_t e = 0; e < 2; ++e) {
    CHECK(one.rows[e].error_c == two.rows[e].error_c);
    CHECK(one.rows[e].error_phi == two.rows[e].error_phi);
    CHECK(one.rows[e].corrected_gradient_error <= one.rows[e].plain_gradient_error);
  }
  TempDir dir("pnp_scen_conv");
  CHECK(orchestrate("converge", cfg, {dir.path.string(), 2}) == 0);
  const auto t = CsvTable::read_file((dir.path / "converge.csv").string());
  CHECK(t.header() == std::vector<std::string>{"epsilon", "error_L1L2_c_cation", "error_L1L2_c_anion", "error_L2_phi",
                                               "corrected_gradient_error", "plain_gradient_error",
                                               "pairing_test_value"});
  CHECK(t.rows().size() == 2);
  CHECK(orchestrate("check", cfg, {dir.path.string(), 1}) == 0);
}

TEST_CASE("app-PNP sweep shrinks with eta") {
  auto cfg = parse_config(kSmall);
  cfg.epsilon.reset();
  const auto rows = run_app_sweep(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].total < rows[0].total);
  CHECK(rows[0].total > 0.0);
}

TEST_CASE("incompatible data run without Poisson when explicitly allowed") {
  ParseOptions opts;
  opts.allow_incompatible = true;
  const auto cfg = parse_config(R"j({
    "schema_version": 1,
    "geometry": { "resolution": 8 },
    "species": [ { "z": 1, "c0": "1 + x1" } ],
    "time": { "T": 0.002, "dt": 1e-3 }
  })j",
                                opts);
  TempDir dir("pnp_scen_incompat");
  REQUIRE(orchestrate("homog", cfg, {dir.path.string(), 1}) == 0);
  CHECK(orchestrate("check", cfg, {dir.path.string(), 1}) == 0);
  const auto s = read_snapshot((dir.path / snapshot_name("homog", "phi", 2)).string());
  for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("command errors") {
  const auto cfg = parse_config(R"j({"schema_version": 1})j");
  TempDir dir("pnp_scen_err");
  CHECK_THROWS_AS(orchestrate("explode", cfg, {dir.path.string(), 1}), ConfigError);
  CHECK_THROWS_AS(orchestrate("micro", cfg, {dir.path.string(), 1}), ConfigError);
  CHECK_THROWS_AS(orchestrate("check", cfg, {(dir.path / "missing").string(), 1}), Error);
}
