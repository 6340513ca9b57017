#include "pnp/config.hpp"
#include "pnp/errors.hpp"
#include "pnp/expression.hpp"
#include "pnp/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pnp;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const char* kReference = R"j({
  "schema_version": 1,
  "geometry": { "inclusion": { "kind": "none" }, "resolution": 32 },
  "species": [
    { "name": "cation", "z": 1, "c0": "0.1 + exp(-((x1 - 0.3)^2 + (x2 - 0.5)^2) / 0.01)" },
    { "name": "anion", "z": -1, "c0": "0.1 + exp(-((x1 - 0.7)^2 + (x2 - 0.5)^2) / 0.01)" }
  ]
})j";

}  // namespace

TEST_CASE("expression grammar") {
  const ExprVars v{0.5, 2.0, 0.25, 0.75, 3.0};
  CHECK(parse_expression("1 + 2 * 3")(v) == 7.0);
  CHECK(parse_expression("2 ^ 3 ^ 2")(v) == 512.0);
  CHECK(parse_expression("-2 ^ 2")(v) == -4.0);
  CHECK(parse_expression("2 ^ -1")(v) == 0.5);
  CHECK(parse_expression("(1 + 2) * 3")(v) == 9.0);
  CHECK(parse_expression("8 / 4 / 2")(v) == 1.0);
  CHECK(parse_expression("10 - 4 - 3")(v) == 3.0);
  CHECK(parse_expression("x1 + x2 * y1 - y2 / t")(v) == doctest::Approx(0.5 + 0.5 - 0.25));
  CHECK(parse_expression("sin(pi * x1)")(v) == doctest::Approx(1.0));
  CHECK(parse_expression("cos(0) + exp(0) + sqrt(16)")(v) == 6.0);
  CHECK(parse_expression("1.5e-3 * 2")(v) == doctest::Approx(3e-3));
  CHECK(parse_expression(" +x2 ")(v) == 2.0);
  CHECK(parse_expression("3").is_constant());
  CHECK_FALSE(parse_expression("3 * t").is_constant());
  CHECK(parse_expression("3 * t").uses("t"));
  CHECK_FALSE(parse_expression("3 * t").uses("x1"));
}

TEST_CASE("expression errors report the position") {
  auto message = [](const std::string& s) {
    try {
      parse_expression(s);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("1 + * 2").find("position 5") != std::string::npos);
  CHECK(message("sin(x1").find("expected ')'") != std::string::npos);
  CHECK(message("foo(1)").find("unknown identifier 'foo'") != std::string::npos);
  CHECK(message("foo(1)").find("position 1") != std::string::npos);
  CHECK(message("1 2").find("position 3") != std::string::npos);
  CHECK(message("").find("unexpected end") != std::string::npos);
  CHECK(message("x3").find("unknown identifier") != std::string::npos);
}

TEST_CASE("minimal document gets the documented defaults") {
  const auto cfg = parse_config(R"j({"schema_version": 1})j");
  CHECK(cfg.name == "run");
  CHECK(cfg.inclusion.kind == InclusionSpec::Kind::none);
  CHECK(cfg.cell_resolution == 64);
  CHECK(cfg.resolution == 64);
  CHECK(cfg.cells_per_period == 8);
  CHECK(cfg.epsilons == std::vector<double>{0.25, 0.125, 0.0625});
  CHECK(cfg.species.empty());
  CHECK(cfg.final_time == 0.0);
  CHECK(cfg.dt == 1e-3);
  CHECK(cfg.app.eta == 0.0);
  CHECK(cfg.app.p == 4.0);
  CHECK(cfg.solver.poisson_tol == 1e-10);
  CHECK(cfg.solver.cell_tol == 1e-10);
  CHECK(cfg.solver.gummel_tol == 1e-8);
  CHECK(cfg.solver.gummel_max_iter == 50);
  CHECK(cfg.solver.max_halvings == 10);
  CHECK(cfg.macro_resolution == 128);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("schema violations name the field") {
  CHECK(error_of(R"j({})j").find("schema_version") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 2})j").find("unsupported version") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "species": [{"c0": 1}]})j").find("species[0].z") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "species": [{"z": 1}]})j").find("species[0].c0") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "species": [{"z": 1.5, "c0": 1}]})j").find("species[0].z") !=
        std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "species": [{"z": 0, "c0": "x1 +"}]})j").find("species[0].c0") !=
        std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "species": [{"z": 0, "c0": "y1"}]})j").find("not allowed") !=
        std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "species": [{"z": 0, "c0": 1, "D": -1}]})j").find("species[0].D") !=
        std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "time": {"dt": 0}})j").find("time.dt") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "time": {"T": -1}})j").find("time.T") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "geometry": {"epsilon": 0.3}})j").find("geometry.epsilon") !=
        std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "geometry": {"inclusion": {"kind": "blob"}}})j")
            .find("geometry.inclusion.kind") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "geometry": {"inclusion": {"kind": "centered_square", "size": 1.2}}})j")
            .find("geometry.inclusion.size") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "app": {"p": 2}})j").find("app.p") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "tme": {}})j").find("tme: unknown field") != std::string::npos);
  CHECK(error_of(R"j({"schema_version": 1, "species": [{"z": 0, "c0": 1, "name": "phi"}]})j")
            .find("species[0].name") != std::string::npos);
  CHECK(error_of("{not json").find("malformed JSON") != std::string::npos);
}

TEST_CASE("reference document is compatible to round-off") {
  const auto cfg = parse_config(kReference);
  CHECK(cfg.compat_residual < 1e-12);
  for (const auto& r : compatibility_reports(cfg)) CHECK(std::abs(r.residual) < 1e-12);
  const auto sp = cfg.species_params();
  REQUIRE(sp.size() == 2);
  CHECK(sp[0].initial(0.3, 0.5) == doctest::Approx(1.1));
  CHECK(sp[1].z == -1);
}

TEST_CASE("compatibility gate") {
  const std::string bad = R"j({
    "schema_version": 1,
    "geometry": { "resolution": 16 },
    "species": [ { "z": 1, "c0": 1.0 } ],
    "boundary_charge": { "xi2": -0.24975 }
  })j";
  std::string msg;
  try {
    parse_config(bad);
  } catch (const CompatibilityError& e) {
    msg = e.what();
    CHECK(std::abs(e.residual() - 1e-3) < 1e-12);
  }
  CHECK(msg.find("compatibility residual 0.000999999") != std::string::npos);
  ParseOptions opts;
  opts.allow_incompatible = true;
  const auto cfg = parse_config(bad, opts);
  CHECK(cfg.allow_incompatible);
  CHECK(cfg.compat_residual == doctest::Approx(1e-3 / 1.999).epsilon(1e-9));

  // Micro grids are checked as well: an oscillation with the period of the
  // cell sums to zero on the full grid but not over the perforated fluid cells.
  const std::string micro = R"j({
    "schema_version": 1,
    "geometry": { "inclusion": { "kind": "centered_square", "size": 0.5 }, "epsilon": 0.25 },
    "species": [ { "z": 1, "c0": "1 + 0.5 * cos(8 * pi * x1)" } ],
    "boundary_charge": { "xi2": -0.1875 }
  })j";
  CHECK(error_of(micro).find("micro eps=0.25") != std::string::npos);
}

TEST_CASE("expression-valued diffusivity and boundary charge") {
  const auto cfg = parse_config(R"j({
    "schema_version": 1,
    "species": [ { "z": 1, "D": "1 + x1 * t", "D_bounds": [1, 3], "c0": "1" },
                 { "z": -1, "c0": 1 } ],
    "boundary_charge": { "xi1": "sin(2*pi*y1)", "xi2": "x1 - 0.5" }
  })j");
  const auto sp = cfg.species_params();
  CHECK(sp[0].diffusivity.at(2.0, 0.5, 0.0) == doctest::Approx(2.0));
  CHECK(sp[0].diffusivity.lower == 1.0);
  CHECK(sp[0].diffusivity.upper == 3.0);
  CHECK(sp[1].diffusivity.at(0.0, 0.3, 0.3) == 1.0);
  const auto bc = cfg.boundary_charge();
  CHECK(bc.inclusion(0.0, 0.0, 0.25, 0.0) == doctest::Approx(1.0));
  CHECK(bc.outer(0.75, 0.0) == doctest::Approx(0.25));
}

TEST_CASE("custom mask file is resolved relative to the config") {
  const auto dir = std::filesystem::temp_directory_path() / "pnp_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream m(dir / "cell.mask");
    write_mask(m, build_unit_cell(8, InclusionSpec::square(0.5)));
    std::ofstream c(dir / "cfg.json");
    c << R"j({"schema_version": 1, "geometry": {"inclusion": {"kind": "custom", "mask_file": "cell.mask"}}})j";
  }
  const auto cfg = load_config((dir / "cfg.json").string());
  CHECK(cfg.cell_grid().fluid_count() == 48);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv and snapshot round trips") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(M_PI)) == M_PI);

  const auto dir = std::filesystem::temp_directory_path() / "pnp_io_test";
  std::filesystem::create_directories(dir);
  CsvTable t({"a", "b"});
  t.add_row({"1", format_double(2.5)});
  CHECK_THROWS(t.add_row({"1"}));
  t.write_file((dir / "t.csv").string());
  const auto back = CsvTable::read_file((dir / "t.csv").string());
  CHECK(back.header() == t.header());
  CHECK(back.rows() == t.rows());
  CHECK(back.column("b") == 1);

  const auto pg = build_perforated_grid(0.5, InclusionSpec::square(0.5), 8);
  const auto field = pg.grid.sample([](double x, double y) { return x - 2 * y; });
  write_snapshot((dir / "s.dat").string(), pg.grid, field, 0.25);
  const auto s = read_snapshot((dir / "s.dat").string());
  CHECK(s.nx == 16);
  CHECK(s.t == 0.25);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) {
      const int k = pg.grid.fluid_index(i, j);
      if (k < 0) CHECK(std::isnan(s.values[j * 16 + i]));
      else CHECK(s.values[j * 16 + i] == field[k]);
    }
  CHECK(snapshot_name("micro", "phi", 40) == "micro_phi_40.dat");
  std::filesystem::remove_all(dir);
}
