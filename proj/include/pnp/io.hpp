#pragma once

#include "pnp/geometry.hpp"
#include "pnp/transient.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace pnp {

/// %.17g; every float written by the tools goes through here.
std::string format_double(double v);

/// Comma-separated table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;
  static CsvTable read_file(const std::string& path);

  /// Column index by name; throws Error if absent.
  std::size_t column(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// One row per species per step: t, species, mass, entropy, dirichlet_energy,
/// free_energy, compat_residual, gummel_iters.
CsvTable diagnostics_table(const Trajectory& tr, const std::vector<std::string>& species);

/// Full n x n field, header "nx ny h t", rows from x2 = 0 upwards, "nan" on solid cells.
void write_snapshot(const std::string& path, const FluidGrid& grid, std::span<const double> field, double t);

struct Snapshot {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  double t = 0.0;
  std::vector<double> values;  // nx*ny, NaN on solid cells
};

Snapshot read_snapshot(const std::string& path);

/// `{run}_{field}_{step}.dat`
std::string snapshot_name(const std::string& run, const std::string& field, long step);

struct RunMetadata {
  std::string run;
  std::string diagnostics;  // file name of the diagnostics CSV
  std::vector<std::string> species;
  std::vector<int> charges;
  std::vector<long> steps;
  std::vector<double> times;
  int resolution = 0;
  bool zero_boundary_charge = true;
  bool poisson = true;
  double compat_scale = 1.0;
};

void write_run_metadata(const std::string& path, const RunMetadata& meta);
RunMetadata read_run_metadata(const std::string& path);

/// Writes snapshots (optional), diagnostics CSV and run.json for a trajectory.
void write_trajectory(const std::string& dir, const std::string& run, const PnpSolver& solver, const Trajectory& tr,
                      bool snapshots);

}  // namespace pnp
