#include "pnp/config.hpp"

#include "pnp/diagnostics.hpp"
#include "pnp/errors.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace pnp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [k, _] : obj.items())
    if (!allowed.count(k)) fail(path.empty() ? k : path + "." + k, "unknown field");
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& obj, const std::string& path, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) fail(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const std::string& path, const std::string& key,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.empty()) fail(join(path, key), "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

/// A number or an expression string restricted to the given variables.
Expression get_expr(const json& obj, const std::string& path, const std::string& key,
                    const std::vector<std::string>& allowed, std::optional<Expression> fallback, bool* present = nullptr) {
  const std::string p = join(path, key);
  if (present) *present = obj.contains(key);
  if (!obj.contains(key)) {
    if (!fallback) fail(p, "missing required field");
    return *fallback;
  }
  const auto& v = obj.at(key);
  Expression e;
  if (v.is_number()) {
    e = Expression::constant(v.get<double>());
  } else if (v.is_string()) {
    try {
      e = parse_expression(v.get<std::string>());
    } catch (const ConfigError& err) {
      fail(p, err.what());
    }
  } else {
    fail(p, "expected a number or an expression string");
  }
  for (const char* var : {"x1", "x2", "y1", "y2", "t"}) {
    if (!e.uses(var)) continue;
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == var;
    if (!ok) fail(p, std::string("variable '") + var + "' is not allowed here");
  }
  return e;
}

void positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be positive");
}

}  // namespace

CellGrid RunConfig::cell_grid(int n) const {
  if (inclusion.kind == InclusionSpec::Kind::custom) return read_mask_file(mask_file);
  return build_unit_cell(n, inclusion);
}

std::vector<SpeciesParams> RunConfig::species_params() const {
  std::vector<SpeciesParams> out;
  for (const auto& s : species) {
    SpeciesParams p;
    p.name = s.name;
    p.z = s.z;
    if (s.diffusivity.is_constant()) {
      p.diffusivity.constant = s.diffusivity(ExprVars{});
    } else {
      auto d = s.diffusivity;
      p.diffusivity.field = [d](double t, double x1, double x2) { return d(ExprVars{x1, x2, 0.0, 0.0, t}); };
    }
    p.diffusivity.lower = s.d_lower;
    if (s.d_upper > 0.0) p.diffusivity.upper = s.d_upper;
    auto c0 = s.initial;
    p.initial = [c0](double x1, double x2) { return c0(ExprVars{x1, x2, 0.0, 0.0, 0.0}); };
    out.push_back(std::move(p));
  }
  return out;
}

BoundaryCharge RunConfig::boundary_charge() const {
  BoundaryCharge bc;
  if (has_xi1) {
    auto e = xi1;
    bc.xi1 = [e](double x1, double x2, double y1, double y2) { return e(ExprVars{x1, x2, y1, y2, 0.0}); };
  }
  if (has_xi2) {
    auto e = xi2;
    bc.xi2 = [e](double x1, double x2) { return e(ExprVars{x1, x2, 0.0, 0.0, 0.0}); };
  }
  return bc;
}

SolverConfig RunConfig::cell_solver() const {
  SolverConfig c;
  c.rel_tol = solver.cell_tol;
  return c;
}

StepControl RunConfig::step_control() const {
  StepControl c;
  c.poisson.rel_tol = solver.poisson_tol;
  c.poisson.jacobi = solver.jacobi;
  c.transport.rel_tol = solver.transport_tol;
  c.transport.jacobi = true;
  c.gummel_tol = solver.gummel_tol;
  c.gummel_max_iter = solver.gummel_max_iter;
  c.max_halvings = solver.max_halvings;
  return c;
}

std::vector<CompatibilityReport> compatibility_reports(const RunConfig& cfg) {
  std::vector<CompatibilityReport> out;
  if (cfg.species.empty()) return out;
  const auto species = cfg.species_params();
  const auto bc = cfg.boundary_charge();
  std::vector<int> z;
  for (const auto& s : species) z.push_back(s.z);
  auto sample_all = [&](const FluidGrid& g) {
    std::vector<std::vector<double>> c;
    for (const auto& s : species) c.push_back(g.sample(s.initial));
    return c;
  };

  const CellGrid cell = cfg.cell_grid();
  const double fraction = fluid_volume_fraction(cell);
  {
    HomTensor ht;
    ht.fluid_fraction = fraction;
    const MacroModel macro = build_macro_model(cell, ht, bc, species);
    const FluidGrid g = build_full_grid(cfg.resolution);
    const auto offset = g.sample(macro.charge_offset);
    std::vector<double> flux;
    for (const auto& f : g.boundary_faces()) flux.push_back(macro.boundary_flux(f.x1, f.x2));
    const auto c = sample_all(g);
    out.push_back({"macro " + std::to_string(cfg.resolution) + "x" + std::to_string(cfg.resolution),
                   compatibility_residual(g, z, c, offset, flux), compatibility_scale(g, z, c, offset, flux)});
  }
  std::vector<double> eps;
  if (cfg.epsilon) eps.push_back(*cfg.epsilon);
  for (double e : cfg.epsilons)
    if (!cfg.epsilon || e != *cfg.epsilon) eps.push_back(e);
  for (double e : eps) {
    const CellGrid tile = cfg.inclusion.kind == InclusionSpec::Kind::custom
                              ? cfg.cell_grid()
                              : build_unit_cell(cfg.cells_per_period, cfg.inclusion);
    const PerforatedGrid pg = build_perforated_grid(e, tile);
    const auto flux = micro_boundary_flux(pg.grid, bc, e);
    const auto c = sample_all(pg.grid);
    char label[64];
    std::snprintf(label, sizeof label, "micro eps=%.17g", e);
    out.push_back({label, compatibility_residual(pg.grid, z, c, {}, flux), compatibility_scale(pg.grid, z, c, {}, flux)});
  }
  return out;
}

RunConfig parse_config(const std::string& text, const ParseOptions& opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, "", {"schema_version", "name", "geometry", "species", "boundary_charge", "time", "app", "solver",
                       "converge", "output"});
  if (!doc.contains("schema_version")) fail("schema_version", "missing required field");
  const int version = get_int(doc, "", "schema_version", 0);
  if (version != kSchemaVersion) fail("schema_version", "unsupported version " + std::to_string(version));

  RunConfig cfg;
  cfg.name = get_string(doc, "", "name", cfg.name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\ ") != std::string::npos)
    fail("name", "must be a non-empty word without separators");

  if (doc.contains("geometry")) {
    const auto& g = doc["geometry"];
    check_keys(g, "geometry", {"inclusion", "cell_resolution", "resolution", "epsilon", "epsilons", "cells_per_period"});
    if (g.contains("inclusion")) {
      const auto& inc = g["inclusion"];
      check_keys(inc, "geometry.inclusion", {"kind", "size", "mask_file"});
      const std::string kind = get_string(inc, "geometry.inclusion", "kind", "none");
      const double size = get_number(inc, "geometry.inclusion", "size", 0.0);
      if (kind == "none") cfg.inclusion = InclusionSpec::none();
      else if (kind == "centered_square") cfg.inclusion = InclusionSpec::square(size);
      else if (kind == "centered_disk") cfg.inclusion = InclusionSpec::disk(size);
      else if (kind == "custom") {
        cfg.inclusion = InclusionSpec::custom();
        const std::string file = get_string(inc, "geometry.inclusion", "mask_file", "");
        if (file.empty()) fail("geometry.inclusion.mask_file", "required for kind \"custom\"");
        std::filesystem::path p(file);
        if (p.is_relative()) p = std::filesystem::path(opts.base_dir) / p;
        cfg.mask_file = p.string();
      } else {
        fail("geometry.inclusion.kind", "expected none, centered_square, centered_disk or custom");
      }
      try {
        cfg.inclusion.validate();
      } catch (const Error& e) {
        fail("geometry.inclusion.size", e.what());
      }
    }
    cfg.cell_resolution = get_int(g, "geometry", "cell_resolution", cfg.cell_resolution);
    cfg.resolution = get_int(g, "geometry", "resolution", cfg.resolution);
    cfg.cells_per_period = get_int(g, "geometry", "cells_per_period", cfg.cells_per_period);
    if (g.contains("epsilon")) cfg.epsilon = get_number(g, "geometry", "epsilon", 0.0);
    cfg.epsilons = get_numbers(g, "geometry", "epsilons", cfg.epsilons);
  }
  if (cfg.cell_resolution < 8 || cfg.cell_resolution % 2) fail("geometry.cell_resolution", "must be an even integer >= 8");
  if (cfg.resolution < 3 || cfg.resolution > 4096) fail("geometry.resolution", "must lie in [3, 4096]");
  if (cfg.cells_per_period < 8 || cfg.cells_per_period % 2)
    fail("geometry.cells_per_period", "must be an even integer >= 8");
  auto check_eps = [&](double e, const std::string& path) {
    positive(e, path);
    const double m = std::round(1.0 / e);
    if (m < 2 || std::abs(1.0 / e - m) > 1e-9 * m) fail(path, "must equal 1/M for an integer M >= 2");
    if (m * cfg.cells_per_period > 4096) fail(path, "fine grid would exceed 4096 cells per direction");
  };
  if (cfg.epsilon) check_eps(*cfg.epsilon, "geometry.epsilon");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
    check_eps(cfg.epsilons[i], "geometry.epsilons[" + std::to_string(i) + "]");

  if (doc.contains("species")) {
    const auto& sp = doc["species"];
    if (!sp.is_array()) fail("species", "expected an array");
    for (std::size_t i = 0; i < sp.size(); ++i) {
      const std::string p = "species[" + std::to_string(i) + "]";
      check_keys(sp[i], p, {"name", "z", "D", "D_bounds", "c0"});
      SpeciesConfig s;
      s.name = get_string(sp[i], p, "name", "c" + std::to_string(i + 1));
      bool word = !s.name.empty() && s.name != "phi";
      for (char ch : s.name) word = word && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
      for (const auto& other : cfg.species) word = word && other.name != s.name;
      if (!word) fail(p + ".name", "must be a unique alphanumeric word other than \"phi\"");
      if (!sp[i].contains("z")) fail(p + ".z", "missing required field");
      s.z = get_int(sp[i], p, "z", 0);
      s.diffusivity = get_expr(sp[i], p, "D", {"x1", "x2", "t"}, Expression::constant(1.0));
      if (s.diffusivity.is_constant()) positive(s.diffusivity(ExprVars{}), p + ".D");
      if (sp[i].contains("D_bounds")) {
        const auto b = get_numbers(sp[i], p, "D_bounds", {});
        if (b.size() != 2 || !(b[0] > 0.0) || !(b[1] >= b[0])) fail(p + ".D_bounds", "expected [m, M] with 0 < m <= M");
        s.d_lower = b[0];
        s.d_upper = b[1];
      }
      s.initial = get_expr(sp[i], p, "c0", {"x1", "x2"}, std::nullopt);
      cfg.species.push_back(std::move(s));
    }
  }

  if (doc.contains("boundary_charge")) {
    const auto& b = doc["boundary_charge"];
    check_keys(b, "boundary_charge", {"xi1", "xi2"});
    cfg.xi1 = get_expr(b, "boundary_charge", "xi1", {"x1", "x2", "y1", "y2"}, Expression::constant(0.0), &cfg.has_xi1);
    cfg.xi2 = get_expr(b, "boundary_charge", "xi2", {"x1", "x2"}, Expression::constant(0.0), &cfg.has_xi2);
  }

  if (doc.contains("time")) {
    const auto& t = doc["time"];
    check_keys(t, "time", {"T", "dt", "output_stride"});
    cfg.final_time = get_number(t, "time", "T", cfg.final_time);
    cfg.dt = get_number(t, "time", "dt", cfg.dt);
    cfg.output_stride = get_int(t, "time", "output_stride", cfg.output_stride);
  }
  if (!(cfg.final_time >= 0.0) || !std::isfinite(cfg.final_time)) fail("time.T", "must be >= 0");
  positive(cfg.dt, "time.dt");
  if (cfg.output_stride < 1) fail("time.output_stride", "must be >= 1");

  if (doc.contains("app")) {
    const auto& a = doc["app"];
    check_keys(a, "app", {"eta", "p", "etas"});
    cfg.app.eta = get_number(a, "app", "eta", cfg.app.eta);
    cfg.app.p = get_number(a, "app", "p", cfg.app.p);
    cfg.etas = get_numbers(a, "app", "etas", cfg.etas);
  }
  if (!(cfg.app.eta >= 0.0)) fail("app.eta", "must be >= 0");
  if (!(cfg.app.p >= 4.0)) fail("app.p", "must be >= 4");
  for (std::size_t i = 0; i < cfg.etas.size(); ++i) positive(cfg.etas[i], "app.etas[" + std::to_string(i) + "]");

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    const std::string p = "solver";
    check_keys(s, p, {"cell_tol", "poisson_tol", "transport_tol", "gummel_tol", "gummel_max_iter", "max_halvings",
                      "jacobi"});
    auto& v = cfg.solver;
    v.cell_tol = get_number(s, p, "cell_tol", v.cell_tol);
    v.poisson_tol = get_number(s, p, "poisson_tol", v.poisson_tol);
    v.transport_tol = get_number(s, p, "transport_tol", v.transport_tol);
    v.gummel_tol = get_number(s, p, "gummel_tol", v.gummel_tol);
    v.gummel_max_iter = get_int(s, p, "gummel_max_iter", v.gummel_max_iter);
    v.max_halvings = get_int(s, p, "max_halvings", v.max_halvings);
    v.jacobi = get_bool(s, p, "jacobi", v.jacobi);
    for (const char* k : {"cell_tol", "poisson_tol", "transport_tol", "gummel_tol"})
      if (s.contains(k)) positive(s[k].get<double>(), p + "." + k);
    if (v.gummel_max_iter < 1) fail("solver.gummel_max_iter", "must be >= 1");
    if (v.max_halvings < 0) fail("solver.max_halvings", "must be >= 0");
  }

  if (doc.contains("converge")) {
    const auto& c = doc["converge"];
    check_keys(c, "converge", {"macro_resolution", "corrector_sampling"});
    cfg.macro_resolution = get_int(c, "converge", "macro_resolution", cfg.macro_resolution);
    const std::string s = get_string(c, "converge", "corrector_sampling", "nearest");
    if (s == "nearest") cfg.corrector_sampling = CellSampling::nearest;
    else if (s == "bilinear") cfg.corrector_sampling = CellSampling::bilinear;
    else fail("converge.corrector_sampling", "expected nearest or bilinear");
  }
  if (cfg.macro_resolution < 3 || cfg.macro_resolution > 4096) fail("converge.macro_resolution", "must lie in [3, 4096]");

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    check_keys(o, "output", {"dir", "snapshots"});
    cfg.output_dir = get_string(o, "output", "dir", cfg.output_dir);
    cfg.snapshots = get_bool(o, "output", "snapshots", cfg.snapshots);
  }

  cfg.allow_incompatible = opts.allow_incompatible;
  for (const auto& r : compatibility_reports(cfg)) {
    cfg.compat_residual = std::max(cfg.compat_residual, std::abs(r.relative()));
    if (std::abs(r.relative()) > 1e-9 && !opts.allow_incompatible)
      throw CompatibilityError("initial data violate the charge compatibility condition on the " + r.grid + " grid",
                               r.residual);
  }
  return cfg;
}

RunConfig load_config(const std::string& path, bool allow_incompatible) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ParseOptions opts;
  opts.base_dir = std::filesystem::path(path).parent_path().string();
  if (opts.base_dir.empty()) opts.base_dir = ".";
  opts.allow_incompatible = allow_incompatible;
  return parse_config(ss.str(), opts);
}

}  // namespace pnp
