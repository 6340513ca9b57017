#pragma once

#include "pnp/geometry.hpp"
#include "pnp/poisson.hpp"
#include "pnp/sparse.hpp"
#include "pnp/tensor.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pnp {

/// D_i(t, x): a constant, or a field sampled at cell centers and averaged
/// harmonically onto faces. `lower`/`upper` are the declared bounds m, M.
struct Diffusivity {
  double constant = 1.0;
  std::function<double(double, double, double)> field;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  double at(double t, double x1, double x2) const { return field ? field(t, x1, x2) : constant; }
};

struct SpeciesParams {
  std::string name;
  int z = 0;
  Diffusivity diffusivity;
  /// c_i^0(x1, x2) ≥ 0.
  std::function<double(double, double)> initial;
};

/// Nonlinear diffusion h(c) = c + η c^p; η = 0 is classical PNP.
struct AppPnpParams {
  double eta = 0.0;
  double p = 4.0;

  void validate() const;
};

struct StepControl {
  SolverConfig poisson{};
  SolverConfig transport{1e-12, 0, NullSpace::none, {}, true};
  double gummel_tol = 1e-8;
  int gummel_max_iter = 50;
  int max_halvings = 10;
};

/// Everything that defines one discrete PNP problem. The micro problem uses
/// the perforated grid with the identity tensor; the homogenized problem the
/// full grid with A_hom, a volumetric charge offset and scaled Neumann data.
struct PnpModel {
  std::shared_ptr<const FluidGrid> grid;
  DiffusionTensor tensor;
  std::vector<SpeciesParams> species;
  std::vector<double> fixed_charge;   // per fluid cell; empty means zero
  std::vector<double> boundary_flux;  // per boundary face; empty means zero
  AppPnpParams app;
  bool solve_potential = true;
  /// True when ξ1 = ξ2 = 0, i.e. the free energy must be non-increasing.
  bool zero_boundary_charge = true;
  StepControl control;
};

struct PnpState {
  std::vector<std::vector<double>> c;
  std::vector<double> phi;
  double t = 0.0;
};

struct StepReport {
  int gummel_iterations = 0;
  int halvings = 0;
};

/// Backward-Euler / Scharfetter–Gummel stepper with a Gummel fixed-point
/// loop between transport and the Neumann Poisson problem.
class PnpSolver {
 public:
  explicit PnpSolver(PnpModel model);

  const PnpModel& model() const noexcept { return model_; }
  const FluidGrid& grid() const noexcept { return *model_.grid; }
  std::span<const int> charges() const noexcept { return charges_; }

  /// Samples c^0 and solves for the consistent potential.
  PnpState initial_state() const;

  /// Potential of the given concentrations (zero when Poisson is disabled).
  std::vector<double> potential(const std::vector<std::vector<double>>& c, std::span<const double> guess = {}) const;

  /// One step of size dt. A step whose Gummel loop does not converge is retried
  /// as two half steps, up to `max_halvings` levels deep; beyond that StepError.
  PnpState advance_step(const PnpState& s, double dt, StepReport* report = nullptr) const;

  double compatibility_residual(const std::vector<std::vector<double>>& c) const;
  double compatibility_scale(const std::vector<std::vector<double>>& c) const;

 private:
  PnpState attempt(const PnpState& s, double dt, int level, StepReport& report) const;
  PnpState gummel_step(const PnpState& s, double dt, int& iterations) const;
  std::vector<double> transport(std::size_t species, std::span<const double> c_old, std::span<const double> phi,
                                std::span<const double> lagged, double t_new, double dt) const;

  PnpModel model_;
  std::vector<int> charges_;
  std::optional<PoissonSolver> poisson_;
};

struct StepDiagnostics {
  double t = 0.0;
  std::vector<double> mass;
  std::vector<double> entropy;
  double dirichlet_energy = 0.0;
  double free_energy = 0.0;
  double compat_residual = 0.0;
  int gummel_iters = 0;
};

struct TimeGrid {
  double final_time = 0.0;
  double dt = 1e-3;
  int output_stride = 1;
};

struct Trajectory {
  std::vector<PnpState> states;               // at output times, starting with t = 0
  std::vector<long> state_steps;              // step index of each stored state
  std::vector<StepDiagnostics> diagnostics;   // every step, starting with t = 0
};

StepDiagnostics diagnose(const PnpSolver& solver, const PnpState& state, int gummel_iters);

Trajectory run_transient(const PnpSolver& solver, const TimeGrid& time);
Trajectory run_transient(const PnpSolver& solver, const PnpState& initial, const TimeGrid& time);

/// PNP on the perforated domain with Neumann data ε ξ1 on grains and ξ2 on ∂Ω.
PnpModel build_micro_model(const PerforatedGrid& grid, std::vector<SpeciesParams> species, const BoundaryCharge& bc,
                           const AppPnpParams& app = {}, const StepControl& control = {});

}  // namespace pnp
