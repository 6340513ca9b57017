#pragma once

#include "pnp/cell_problem.hpp"
#include "pnp/expression.hpp"
#include "pnp/geometry.hpp"
#include "pnp/homogenization.hpp"
#include "pnp/poisson.hpp"
#include "pnp/transient.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace pnp {

inline constexpr int kSchemaVersion = 1;

struct SpeciesConfig {
  std::string name;
  int z = 0;
  Expression diffusivity = Expression::constant(1.0);  // in x1, x2, t
  double d_lower = 0.0;
  double d_upper = 0.0;  // 0 = unbounded
  Expression initial;    // in x1, x2
};

struct SolverSettings {
  double cell_tol = 1e-10;
  double poisson_tol = 1e-10;
  double transport_tol = 1e-12;
  double gummel_tol = 1e-8;
  int gummel_max_iter = 50;
  int max_halvings = 10;
  bool jacobi = true;
};

struct RunConfig {
  std::string name = "run";

  InclusionSpec inclusion;
  std::string mask_file;  // resolved path for inclusion kind "custom"
  int cell_resolution = 64;
  int resolution = 64;
  std::optional<double> epsilon;
  std::vector<double> epsilons{0.25, 0.125, 0.0625};
  int cells_per_period = 8;

  std::vector<SpeciesConfig> species;
  Expression xi1;  // in x1, x2, y1, y2
  Expression xi2;  // in x1, x2
  bool has_xi1 = false;
  bool has_xi2 = false;

  double final_time = 0.0;
  double dt = 1e-3;
  int output_stride = 1;

  AppPnpParams app;
  std::vector<double> etas{1e-1, 1e-2, 1e-3};

  SolverSettings solver;

  int macro_resolution = 128;
  CellSampling corrector_sampling = CellSampling::nearest;

  std::string output_dir = "out";
  bool snapshots = true;

  bool allow_incompatible = false;
  /// Largest relative compatibility residual over the grids this config runs on.
  double compat_residual = 0.0;

  CellGrid cell_grid(int resolution) const;
  CellGrid cell_grid() const { return cell_grid(cell_resolution); }
  std::vector<SpeciesParams> species_params() const;
  BoundaryCharge boundary_charge() const;
  SolverConfig cell_solver() const;
  StepControl step_control() const;
  TimeGrid time_grid() const { return {final_time, dt, output_stride}; }
};

struct ParseOptions {
  std::string base_dir = ".";
  bool allow_incompatible = false;
};

/// Parses and validates a JSON run configuration. Schema violations raise
/// ConfigError naming the field path; a compatibility residual above 1e-9
/// raises CompatibilityError unless `allow_incompatible` is set.
RunConfig parse_config(const std::string& text, const ParseOptions& opts = {});
RunConfig load_config(const std::string& path, bool allow_incompatible = false);

struct CompatibilityReport {
  std::string grid;
  double residual = 0.0;
  double scale = 0.0;
  double relative() const { return residual / std::max(1.0, scale); }
};

/// Discrete compatibility residuals of the initial data on the macro grid and
/// every perforated grid the config would run on.
std::vector<CompatibilityReport> compatibility_reports(const RunConfig& cfg);

}  // namespace pnp
