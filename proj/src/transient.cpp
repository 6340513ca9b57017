#include "pnp/transient.hpp"

#include "pnp/diagnostics.hpp"
#include "pnp/errors.hpp"
#include "pnp/log.hpp"
#include "pnp/scharfetter_gummel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pnp {

void AppPnpParams::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("app-PNP eta must be a finite value >= 0");
  if (!(p >= 4.0) || !std::isfinite(p)) throw ValidationError("app-PNP exponent p must be >= 4");
}

namespace {

void check_model(const PnpModel& m) {
  if (!m.grid) throw ValidationError("PNP model has no grid");
  if (m.species.empty()) throw ValidationError("PNP model needs at least one species");
  const auto n = static_cast<std::size_t>(m.grid->fluid_count());
  if (!m.fixed_charge.empty() && m.fixed_charge.size() != n)
    throw ValidationError("fixed charge size does not match the fluid cell count");
  if (!m.boundary_flux.empty() && m.boundary_flux.size() != m.grid->boundary_faces().size())
    throw ValidationError("boundary flux size does not match the boundary face count");
  if (!(m.tensor.a11 > 0.0) || !(m.tensor.a22 > 0.0)) throw ValidationError("diffusion tensor must be positive");
  m.app.validate();
  for (std::size_t i = 0; i < m.species.size(); ++i) {
    const auto& d = m.species[i].diffusivity;
    if (!(d.lower >= 0.0) || !(d.upper >= d.lower))
      throw ValidationError("species[" + std::to_string(i) + "].D: bounds must satisfy 0 <= m <= M");
    if (!d.field && !(d.constant > 0.0))
      throw ValidationError("species[" + std::to_string(i) + "].D must be positive");
  }
}

}  // namespace

PnpSolver::PnpSolver(PnpModel model) : model_(std::move(model)) {
  check_model(model_);
  for (const auto& s : model_.species) charges_.push_back(s.z);
  if (model_.solve_potential) {
    SolverConfig cfg = model_.control.poisson;
    poisson_.emplace(*model_.grid, model_.tensor, cfg);
  }
}

std::vector<double> PnpSolver::potential(const std::vector<std::vector<double>>& c,
                                         std::span<const double> guess) const {
  const auto n = static_cast<std::size_t>(grid().fluid_count());
  if (!poisson_) return std::vector<double>(n, 0.0);
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double z = charges_[i];
    if (z == 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) f[k] += z * c[i][k];
  }
  if (!model_.fixed_charge.empty())
    for (std::size_t k = 0; k < n; ++k) f[k] += model_.fixed_charge[k];
  return poisson_->solve(f, model_.boundary_flux, guess).phi;
}

double PnpSolver::compatibility_residual(const std::vector<std::vector<double>>& c) const {
  return pnp::compatibility_residual(grid(), charges_, c, model_.fixed_charge, model_.boundary_flux);
}

double PnpSolver::compatibility_scale(const std::vector<std::vector<double>>& c) const {
  return pnp::compatibility_scale(grid(), charges_, c, model_.fixed_charge, model_.boundary_flux);
}

PnpState PnpSolver::initial_state() const {
  PnpState s;
  s.t = 0.0;
  for (std::size_t i = 0; i < model_.species.size(); ++i) {
    const auto& sp = model_.species[i];
    std::vector<double> c = sp.initial ? grid().sample(sp.initial)
                                       : std::vector<double>(static_cast<std::size_t>(grid().fluid_count()), 0.0);
    for (double v : c)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("species[" + std::to_string(i) + "].c0 must be finite and non-negative");
    s.c.push_back(std::move(c));
  }
  s.phi = potential(s.c);
  return s;
}

std::vector<double> PnpSolver::transport(std::size_t species, std::span<const double> c_old,
                                         std::span<const double> phi, std::span<const double> lagged,
                                         double t_new, double dt) const {
  const FluidGrid& g = grid();
  const auto& sp = model_.species[species];
  const double z = sp.z;
  const int n = g.fluid_count();
  const double vol = g.cell_volume();

  std::vector<double> d(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double v = sp.diffusivity.at(t_new, g.center_x1(k), g.center_x2(k));
    if (!(v > 0.0) || v < sp.diffusivity.lower * (1 - 1e-12) || v > sp.diffusivity.upper * (1 + 1e-12))
      throw ValidationError("species[" + std::to_string(species) + "].D outside its declared bounds at t=" +
                            std::to_string(t_new));
    d[static_cast<std::size_t>(k)] = v;
  }

  const auto& faces = g.faces();
  const double eta = model_.app.eta;
  const double p = model_.app.p;
  // Per face: flux L->R = coef * (bp * c_L - bm * c_R).
  std::vector<double> coef(faces.size()), bp(faces.size()), bm(faces.size());
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n) + 2 * faces.size());
  std::vector<double> diag(static_cast<std::size_t>(n), vol / dt);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& fc = faces[f];
    const double dl = d[static_cast<std::size_t>(fc.left)], dr = d[static_cast<std::size_t>(fc.right)];
    double dface = 2.0 * dl * dr / (dl + dr) * model_.tensor.along(static_cast<int>(fc.axis));
    double dpsi = z * (phi[static_cast<std::size_t>(fc.right)] - phi[static_cast<std::size_t>(fc.left)]);
    if (eta > 0.0) {
      // Nonlinear diffusion enters as a face factor 1 + η p ĉ^{p-1}, with ĉ the
      // upwind value of the previous iterate; drift is left unchanged.
      const double cl = lagged[static_cast<std::size_t>(fc.left)], cr = lagged[static_cast<std::size_t>(fc.right)];
      const double chat = dpsi < 0.0 ? cl : (dpsi > 0.0 ? cr : 0.5 * (cl + cr));
      const double gf = 1.0 + eta * p * std::pow(std::max(chat, 0.0), p - 1.0);
      dface *= gf;
      dpsi /= gf;
    }
    coef[f] = dface;
    bp[f] = bernoulli(dpsi);
    bm[f] = bernoulli(-dpsi);
    diag[static_cast<std::size_t>(fc.left)] += dface * bp[f];
    diag[static_cast<std::size_t>(fc.right)] += dface * bm[f];
    trip.push_back({fc.left, fc.right, -dface * bm[f]});
    trip.push_back({fc.right, fc.left, -dface * bp[f]});
  }
  for (int k = 0; k < n; ++k) trip.push_back({k, k, diag[static_cast<std::size_t>(k)]});
  const SparseMatrix a = SparseMatrix::from_triplets(n, std::move(trip));

  std::vector<double> rhs(c_old.begin(), c_old.end());
  for (double& v : rhs) v *= vol / dt;

  std::vector<double> x;
  try {
    x = solve_nonsym(a, rhs, model_.control.transport, lagged).x;
  } catch (const SolverError& e) {
    if (n > 4096) throw;
    log_debug(std::string("transport: Krylov failed, using banded LU: ") + e.what());
    x = solve_banded(a, rhs);
  }

  // Conservative update: masses change only through face fluxes, so the
  // total is preserved independently of the linear solver tolerance.
  std::vector<double> c_new(c_old.begin(), c_old.end());
  const double s = dt / vol;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& fc = faces[f];
    const double flux = coef[f] * (bp[f] * x[static_cast<std::size_t>(fc.left)] -
                                   bm[f] * x[static_cast<std::size_t>(fc.right)]);
    c_new[static_cast<std::size_t>(fc.left)] -= s * flux;
    c_new[static_cast<std::size_t>(fc.right)] += s * flux;
  }
  for (double v : c_new)
    if (!(v >= 0.0) || !std::isfinite(v)) throw StepError("negative or non-finite concentration");
  return c_new;
}

PnpState PnpSolver::gummel_step(const PnpState& s, double dt, int& iterations) const {
  const double t_new = s.t + dt;
  std::vector<double> phi = s.phi;
  std::vector<std::vector<double>> lag = s.c;
  const auto& ctl = model_.control;
  for (int it = 1; it <= ctl.gummel_max_iter; ++it) {
    std::vector<std::vector<double>> c(s.c.size());
    for (std::size_t i = 0; i < s.c.size(); ++i) c[i] = transport(i, s.c[i], phi, lag[i], t_new, dt);
    std::vector<double> phi_new = potential(c, phi);
    double change = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) change = std::max(change, std::abs(phi_new[k] - phi[k]));
    lag = std::move(c);
    phi = std::move(phi_new);
    if (change < ctl.gummel_tol) {
      iterations = it;
      return PnpState{std::move(lag), std::move(phi), t_new};
    }
  }
  throw StepError("Gummel iteration did not converge in " + std::to_string(ctl.gummel_max_iter) + " iterations");
}

PnpState PnpSolver::attempt(const PnpState& s, double dt, int level, StepReport& report) const {
  try {
    int iters = 0;
    PnpState out = gummel_step(s, dt, iters);
    report.gummel_iterations = std::max(report.gummel_iterations, iters);
    return out;
  } catch (const StepError& e) {
    if (level >= model_.control.max_halvings)
      throw StepError(std::string("step failed after ") + std::to_string(level) + " dt halvings: " + e.what());
    log_debug(std::string("halving dt: ") + e.what());
  } catch (const SolverError& e) {
    if (level >= model_.control.max_halvings)
      throw StepError(std::string("step failed after ") + std::to_string(level) + " dt halvings: " + e.what());
    log_debug(std::string("halving dt: ") + e.what());
  }
  report.halvings = std::max(report.halvings, level + 1);
  PnpState mid = attempt(s, 0.5 * dt, level + 1, report);
  return attempt(mid, 0.5 * dt, level + 1, report);
}

PnpState PnpSolver::advance_step(const PnpState& s, double dt, StepReport* report) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  StepReport local;
  PnpState out = attempt(s, dt, 0, local);
  out.t = s.t + dt;
  if (report) *report = local;
  return out;
}

StepDiagnostics diagnose(const PnpSolver& solver, const PnpState& state, int gummel_iters) {
  const FluidGrid& g = solver.grid();
  const auto vols = g.volumes();
  StepDiagnostics d;
  d.t = state.t;
  for (const auto& c : state.c) {
    d.mass.push_back(mass(g, c));
    d.entropy.push_back(entropy_functional(c, vols));
  }
  d.dirichlet_energy = dirichlet_energy(g, state.phi, solver.model().tensor);
  d.free_energy = free_energy(g, state.c, state.phi, solver.model().tensor);
  d.compat_residual = solver.compatibility_residual(state.c);
  d.gummel_iters = gummel_iters;
  return d;
}

Trajectory run_transient(const PnpSolver& solver, const TimeGrid& time) {
  return run_transient(solver, solver.initial_state(), time);
}

Trajectory run_transient(const PnpSolver& solver, const PnpState& initial, const TimeGrid& time) {
  if (!(time.final_time >= 0.0) || !(time.dt > 0.0)) throw ValidationError("need T >= 0 and dt > 0");
  if (time.output_stride < 1) throw ValidationError("output stride must be >= 1");
  Trajectory tr;
  tr.states.push_back(initial);
  tr.state_steps.push_back(0);
  tr.diagnostics.push_back(diagnose(solver, initial, 0));
  const long steps = static_cast<long>(std::ceil(time.final_time / time.dt - 1e-9));
  PnpState s = initial;
  for (long k = 1; k <= steps; ++k) {
    const double t_target = std::min(time.final_time, static_cast<double>(k) * time.dt);
    StepReport rep;
    s = solver.advance_step(s, t_target - s.t, &rep);
    s.t = t_target;
    tr.diagnostics.push_back(diagnose(solver, s, rep.gummel_iterations));
    if (k % time.output_stride == 0 || k == steps) {
      tr.states.push_back(s);
      tr.state_steps.push_back(k);
    }
    log_debug("t=" + std::to_string(s.t) + " gummel=" + std::to_string(rep.gummel_iterations));
  }
  return tr;
}

PnpModel build_micro_model(const PerforatedGrid& grid, std::vector<SpeciesParams> species, const BoundaryCharge& bc,
                           const AppPnpParams& app, const StepControl& control) {
  PnpModel m;
  m.grid = std::make_shared<const FluidGrid>(grid.grid);
  m.tensor = DiffusionTensor::identity();
  m.species = std::move(species);
  m.boundary_flux = micro_boundary_flux(grid.grid, bc, grid.epsilon);
  m.app = app;
  m.control = control;
  m.zero_boundary_charge = !bc.xi1 && !bc.xi2;
  return m;
}

}  // namespace pnp
