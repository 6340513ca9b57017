#pragma once

#include "pnp/config.hpp"
#include "pnp/homogenization.hpp"
#include "pnp/io.hpp"
#include "pnp/transient.hpp"

#include <string>
#include <vector>

namespace pnp {

struct RunOptions {
  std::string out_dir;  // empty: use the config's output.dir
  int threads = 1;
};

/// Runs one subcommand (cell, homog, micro, converge, app-pnp-sweep, check)
/// and returns the process exit status.
int orchestrate(const std::string& command, const RunConfig& cfg, const RunOptions& opts);

/// Homogenized model of a config: cell problem at `cell`, macro grid n x n.
PnpModel macro_model_for(const RunConfig& cfg, const CellGrid& cell, const HomTensor& ht, int resolution);
/// Micro model of a config at period ε, tiling `tile`.
PnpModel micro_model_for(const RunConfig& cfg, const PerforatedGrid& grid);

struct ConvergeRow {
  double epsilon = 0.0;
  std::vector<double> error_c;  // L1(0,T;L2) per species
  double error_phi = 0.0;       // L2(0,T;L2)
  double corrected_gradient_error = 0.0;
  double plain_gradient_error = 0.0;
  double pairing = 0.0;
};

struct ConvergeResult {
  HomTensor tensor;
  std::vector<ConvergeRow> rows;  // in the order of cfg.epsilons
  double two_scale_residual = 0.0;
  bool c_decreasing = true;
  bool phi_decreasing = true;
};

/// ε-sweep against one homogenized run. The cell problem is solved on the
/// same n_c x n_c mask that tiles the perforated grids.
ConvergeResult run_converge(const RunConfig& cfg, int threads = 1, const std::string& out_dir = "");

struct EtaRow {
  double eta = 0.0;
  std::vector<double> difference;  // ‖c^η - c^0‖ in L1(0,T;L2) per species
  double total = 0.0;
};

std::vector<EtaRow> run_app_sweep(const RunConfig& cfg);

struct CheckRow {
  std::string run;
  std::string check;
  bool pass = true;
  bool skipped = false;
  double value = 0.0;
  double threshold = 0.0;
};

/// Invariant suite over a stored run directory (or each run subdirectory).
std::vector<CheckRow> check_directory(const std::string& dir);

}  // namespace pnp
