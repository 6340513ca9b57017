#include "pnp/io.hpp"

#include "pnp/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace pnp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw Error("CSV row has the wrong number of cells");
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write(out);
  if (!out) throw Error("write failed for " + path);
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty CSV");
  CsvTable t(split(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header_.size()) throw Error(path + ": malformed CSV row");
    t.rows_.push_back(std::move(cells));
  }
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw Error("CSV has no column " + name);
}

CsvTable diagnostics_table(const Trajectory& tr, const std::vector<std::string>& species) {
  CsvTable t({"t", "species", "mass", "entropy", "dirichlet_energy", "free_energy", "compat_residual", "gummel_iters"});
  for (const auto& d : tr.diagnostics) {
    for (std::size_t i = 0; i < d.mass.size(); ++i) {
      t.add_row({format_double(d.t), i < species.size() ? species[i] : std::to_string(i), format_double(d.mass[i]),
                 format_double(d.entropy[i]), format_double(d.dirichlet_energy), format_double(d.free_energy),
                 format_double(d.compat_residual), std::to_string(d.gummel_iters)});
    }
  }
  return t;
}

void write_snapshot(const std::string& path, const FluidGrid& grid, std::span<const double> field, double t) {
  const int n = grid.resolution();
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << n << ' ' << n << ' ' << format_double(grid.spacing()) << ' ' << format_double(t) << '\n';
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = grid.fluid_index(i, j);
      out << (i ? " " : "") << (k < 0 ? std::string("nan") : format_double(field[static_cast<std::size_t>(k)]));
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  Snapshot s;
  if (!(in >> s.nx >> s.ny >> s.h >> s.t) || s.nx <= 0 || s.ny <= 0) throw Error(path + ": bad snapshot header");
  s.values.resize(static_cast<std::size_t>(s.nx) * s.ny);
  std::string tok;
  for (auto& v : s.values) {
    if (!(in >> tok)) throw Error(path + ": truncated snapshot");
    if (tok == "nan") {
      v = std::numeric_limits<double>::quiet_NaN();
    } else {
      try {
        v = std::stod(tok);
      } catch (const std::exception&) {
        throw Error(path + ": bad value '" + tok + "'");
      }
    }
  }
  return s;
}

std::string snapshot_name(const std::string& run, const std::string& field, long step) {
  return run + "_" + field + "_" + std::to_string(step) + ".dat";
}

void write_run_metadata(const std::string& path, const RunMetadata& m) {
  nlohmann::ordered_json j;
  j["run"] = m.run;
  j["diagnostics"] = m.diagnostics;
  j["species"] = m.species;
  j["charges"] = m.charges;
  j["steps"] = m.steps;
  std::vector<std::string> times;
  for (double t : m.times) times.push_back(format_double(t));
  j["times"] = times;
  j["resolution"] = m.resolution;
  j["zero_boundary_charge"] = m.zero_boundary_charge;
  j["poisson"] = m.poisson;
  j["compat_scale"] = format_double(m.compat_scale);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

RunMetadata read_run_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  RunMetadata m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.run = j.at("run").get<std::string>();
    m.diagnostics = j.at("diagnostics").get<std::string>();
    m.species = j.at("species").get<std::vector<std::string>>();
    m.charges = j.at("charges").get<std::vector<int>>();
    m.steps = j.at("steps").get<std::vector<long>>();
    for (const auto& t : j.at("times")) m.times.push_back(std::stod(t.get<std::string>()));
    m.resolution = j.at("resolution").get<int>();
    m.zero_boundary_charge = j.at("zero_boundary_charge").get<bool>();
    m.poisson = j.at("poisson").get<bool>();
    m.compat_scale = std::stod(j.at("compat_scale").get<std::string>());
  } catch (const std::exception& e) {
    throw Error(path + ": invalid run metadata: " + e.what());
  }
  return m;
}

void write_trajectory(const std::string& dir, const std::string& run, const PnpSolver& solver, const Trajectory& tr,
                      bool snapshots) {
  std::filesystem::create_directories(dir);
  const auto& species = solver.model().species;
  std::vector<std::string> names;
  for (const auto& s : species) names.push_back(s.name);
  const std::string diag = run + "_diagnostics.csv";
  diagnostics_table(tr, names).write_file((std::filesystem::path(dir) / diag).string());

  RunMetadata m;
  m.run = run;
  m.diagnostics = diag;
  m.species = names;
  for (const auto& s : species) m.charges.push_back(s.z);
  m.resolution = solver.grid().resolution();
  m.zero_boundary_charge = solver.model().zero_boundary_charge;
  m.poisson = solver.model().solve_potential;
  m.compat_scale = tr.states.empty() ? 1.0 : solver.compatibility_scale(tr.states.front().c);
  if (snapshots) {
    for (std::size_t s = 0; s < tr.states.size(); ++s) {
      const auto& st = tr.states[s];
      const long step = tr.state_steps[s];
      for (std::size_t i = 0; i < st.c.size(); ++i)
        write_snapshot((std::filesystem::path(dir) / snapshot_name(run, names[i], step)).string(), solver.grid(),
                       st.c[i], st.t);
      write_snapshot((std::filesystem::path(dir) / snapshot_name(run, "phi", step)).string(), solver.grid(), st.phi,
                     st.t);
      m.steps.push_back(step);
      m.times.push_back(st.t);
    }
  }
  write_run_metadata((std::filesystem::path(dir) / "run.json").string(), m);
}

}  // namespace pnp
