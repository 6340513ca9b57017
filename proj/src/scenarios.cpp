#include "pnp/scenarios.hpp"

#include "pnp/diagnostics.hpp"
#include "pnp/errors.hpp"
#include "pnp/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <filesystem>
#include <future>
#include <map>
#include <numbers>

namespace fs = std::filesystem;

namespace pnp {

namespace {

std::string out_dir_of(const RunConfig& cfg, const RunOptions& opts) {
  return opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
}

CsvTable cell_table(const CellGrid& cell, const HomTensor& ht) {
  CsvTable t({"resolution", "fluid_fraction", "a11", "a12", "a21", "a22", "iterations_x1", "iterations_x2",
              "residual_x1", "residual_x2"});
  t.add_row({std::to_string(cell.resolution()), format_double(ht.fluid_fraction), format_double(ht.a.a11),
             format_double(ht.a.a12), format_double(ht.a.a21), format_double(ht.a.a22),
             std::to_string(ht.cell_solutions[0].stats.iterations),
             std::to_string(ht.cell_solutions[1].stats.iterations),
             format_double(ht.cell_solutions[0].stats.relative_residual),
             format_double(ht.cell_solutions[1].stats.relative_residual)});
  return t;
}

CellGrid converge_cell(const RunConfig& cfg) {
  if (cfg.inclusion.kind == InclusionSpec::Kind::custom) return cfg.cell_grid();
  return build_unit_cell(cfg.cells_per_period, cfg.inclusion);
}

std::vector<double> times_of(const Trajectory& tr) {
  std::vector<double> t;
  for (const auto& s : tr.states) t.push_back(s.t);
  return t;
}

std::vector<std::vector<double>> species_series(const Trajectory& tr, std::size_t i) {
  std::vector<std::vector<double>> out;
  for (const auto& s : tr.states) out.push_back(s.c[i]);
  return out;
}

std::vector<std::vector<double>> phi_series(const Trajectory& tr) {
  std::vector<std::vector<double>> out;
  for (const auto& s : tr.states) out.push_back(s.phi);
  return out;
}

std::string eps_label(double eps) { return "micro_M" + std::to_string(static_cast<long>(std::lround(1.0 / eps))); }

}  // namespace

PnpModel macro_model_for(const RunConfig& cfg, const CellGrid& cell, const HomTensor& ht, int resolution) {
  const MacroModel macro = build_macro_model(cell, ht, cfg.boundary_charge(), cfg.species_params());
  PnpModel m = to_pnp_model(macro, resolution, cfg.app, cfg.step_control());
  m.solve_potential = !cfg.allow_incompatible;
  return m;
}

PnpModel micro_model_for(const RunConfig& cfg, const PerforatedGrid& grid) {
  PnpModel m = build_micro_model(grid, cfg.species_params(), cfg.boundary_charge(), cfg.app, cfg.step_control());
  m.solve_potential = !cfg.allow_incompatible;
  return m;
}

ConvergeResult run_converge(const RunConfig& cfg, int threads, const std::string& out_dir) {
  if (cfg.species.empty()) throw ConfigError("species: converge needs at least one species");
  const CellGrid cell = converge_cell(cfg);
  ConvergeResult res;
  res.tensor = compute_hom_tensor(cell, cfg.cell_solver());
  log_info("A_hom = [" + format_double(res.tensor.a.a11) + ", " + format_double(res.tensor.a.a12) + "; " +
           format_double(res.tensor.a.a21) + ", " + format_double(res.tensor.a.a22) + "]");

  const PnpSolver macro_solver(macro_model_for(cfg, cell, res.tensor, cfg.macro_resolution));
  const Trajectory macro = run_transient(macro_solver, cfg.time_grid());
  const FluidGrid& mgrid = macro_solver.grid();
  res.two_scale_residual = two_scale_cell_residual(cell, res.tensor.cell_solutions, mgrid, macro.states.back().c[0]);
  log_info("two-scale cell residual " + format_double(res.two_scale_residual));

  struct MicroOut {
    ConvergeRow row;
    std::optional<PnpSolver> solver;
    Trajectory tr;
  };
  auto run_one = [&](double eps) {
    MicroOut out;
    const PerforatedGrid pg = build_perforated_grid(eps, cell);
    out.solver.emplace(micro_model_for(cfg, pg));
    log_info("micro eps=" + format_double(eps) + ": " + std::to_string(pg.grid.fluid_count()) + " fluid cells");
    out.tr = run_transient(*out.solver, cfg.time_grid());
    const auto times = times_of(out.tr);
    if (times != times_of(macro)) throw Error("micro and macro output times differ");
    ConvergeRow& row = out.row;
    row.epsilon = eps;
    for (std::size_t i = 0; i < cfg.species.size(); ++i)
      row.error_c.push_back(
          error_L1L2(pg.grid, times, species_series(out.tr, i), mgrid, species_series(macro, i)));
    row.error_phi = error_L2L2(pg.grid, times, phi_series(out.tr), mgrid, phi_series(macro));
    // Potential at t = 0: a pure Poisson comparison.
    const auto& phi_eps = out.tr.states.front().phi;
    const auto fine_grad = fine_gradient(pg.grid, phi_eps, out.solver->model().boundary_flux);
    const auto corr = reconstruct_corrector(mgrid, macro.states.front().phi, cell, res.tensor.cell_solutions, pg, eps,
                                            cfg.corrector_sampling);
    row.corrected_gradient_error = gradient_error(pg.grid, fine_grad, corr.gradient);
    row.plain_gradient_error = gradient_error(pg.grid, fine_grad, corr.plain_gradient);
    const auto osc = pg.grid.sample([eps](double x1, double) { return std::sin(2.0 * std::numbers::pi * x1 / eps); });
    row.pairing = two_scale_pairing(
        pg.grid, osc, [](double, double, double y1, double) { return std::sin(2.0 * std::numbers::pi * y1); }, eps);
    return out;
  };

  std::vector<MicroOut> outs(cfg.epsilons.size());
  const int workers = std::max(1, threads);
  for (std::size_t start = 0; start < cfg.epsilons.size(); start += static_cast<std::size_t>(workers)) {
    std::vector<std::future<MicroOut>> jobs;
    const std::size_t stop = std::min(cfg.epsilons.size(), start + static_cast<std::size_t>(workers));
    for (std::size_t e = start; e < stop; ++e)
      jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_one, cfg.epsilons[e]));
    for (std::size_t e = start; e < stop; ++e) outs[e] = jobs[e - start].get();
  }

  for (std::size_t e = 0; e < outs.size(); ++e) {
    res.rows.push_back(outs[e].row);
    if (e > 0) {
      for (std::size_t i = 0; i < cfg.species.size(); ++i)
        if (!(res.rows[e].error_c[i] < res.rows[e - 1].error_c[i])) res.c_decreasing = false;
      if (!(res.rows[e].error_phi < res.rows[e - 1].error_phi)) res.phi_decreasing = false;
    }
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::vector<std::string> header{"epsilon"};
    for (const auto& s : cfg.species) header.push_back("error_L1L2_c_" + s.name);
    for (const char* h : {"error_L2_phi", "corrected_gradient_error", "plain_gradient_error", "pairing_test_value"})
      header.push_back(h);
    CsvTable t(header);
    for (const auto& r : res.rows) {
      std::vector<std::string> cells{format_double(r.epsilon)};
      for (double v : r.error_c) cells.push_back(format_double(v));
      for (double v : {r.error_phi, r.corrected_gradient_error, r.plain_gradient_error, r.pairing})
        cells.push_back(format_double(v));
      t.add_row(cells);
    }
    t.write_file((fs::path(out_dir) / "converge.csv").string());
    CsvTable checks({"check", "status", "value"});
    checks.add_row({"error_c_decreasing", res.c_decreasing ? "PASS" : "FAIL", ""});
    checks.add_row({"error_phi_decreasing", res.phi_decreasing ? "PASS" : "FAIL", ""});
    checks.add_row({"two_scale_cell_residual", res.two_scale_residual <= 1e-8 ? "PASS" : "FAIL",
                    format_double(res.two_scale_residual)});
    checks.write_file((fs::path(out_dir) / "converge_checks.csv").string());
    cell_table(cell, res.tensor).write_file((fs::path(out_dir) / "cell.csv").string());
    write_trajectory((fs::path(out_dir) / "homog").string(), "homog", macro_solver, macro, cfg.snapshots);
    for (std::size_t e = 0; e < outs.size(); ++e)
      write_trajectory((fs::path(out_dir) / eps_label(cfg.epsilons[e])).string(), "micro", *outs[e].solver,
                       outs[e].tr, cfg.snapshots);
  }
  return res;
}

std::vector<EtaRow> run_app_sweep(const RunConfig& cfg) {
  if (cfg.species.empty()) throw ConfigError("species: app-pnp-sweep needs at least one species");
  auto model_for = [&](double eta) {
    RunConfig c = cfg;
    c.app.eta = eta;
    if (cfg.epsilon) {
      const PerforatedGrid pg = build_perforated_grid(*cfg.epsilon, converge_cell(cfg));
      return micro_model_for(c, pg);
    }
    PnpModel m;
    m.grid = std::make_shared<const FluidGrid>(build_full_grid(cfg.resolution));
    m.species = c.species_params();
    m.app = c.app;
    m.control = c.step_control();
    BoundaryCharge bc = c.boundary_charge();
    for (const auto& f : m.grid->boundary_faces()) m.boundary_flux.push_back(bc.outer(f.x1, f.x2));
    m.zero_boundary_charge = !bc.xi2;
    m.solve_potential = !cfg.allow_incompatible;
    return m;
  };
  const PnpSolver base(model_for(0.0));
  const Trajectory ref = run_transient(base, cfg.time_grid());
  const auto times = times_of(ref);
  std::vector<EtaRow> rows;
  for (double eta : cfg.etas) {
    const PnpSolver s(model_for(eta));
    const Trajectory tr = run_transient(s, cfg.time_grid());
    EtaRow row;
    row.eta = eta;
    for (std::size_t i = 0; i < cfg.species.size(); ++i) {
      row.difference.push_back(difference_L1L2(base.grid(), times, species_series(tr, i), species_series(ref, i)));
      row.total += row.difference.back();
    }
    log_info("eta=" + format_double(eta) + " difference " + format_double(row.total));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::vector<CheckRow> check_run(const std::string& dir) {
  const RunMetadata meta = read_run_metadata((fs::path(dir) / "run.json").string());
  const CsvTable diag = CsvTable::read_file((fs::path(dir) / meta.diagnostics).string());
  const std::string run = fs::path(dir).filename().string();
  std::vector<CheckRow> rows;

  const auto ct = diag.column("t"), cs = diag.column("species"), cm = diag.column("mass"),
             ce = diag.column("entropy"), cd = diag.column("dirichlet_energy"), cf = diag.column("free_energy"),
             cr = diag.column("compat_residual");
  struct Step {
    double t, dirichlet, free, compat;
    std::map<std::string, double> mass, entropy;
  };
  std::vector<Step> steps;
  for (const auto& r : diag.rows()) {
    const double t = std::stod(r[ct]);
    if (steps.empty() || steps.back().t != t)
      steps.push_back({t, std::stod(r[cd]), std::stod(r[cf]), std::stod(r[cr]), {}, {}});
    steps.back().mass[r[cs]] = std::stod(r[cm]);
    steps.back().entropy[r[cs]] = std::stod(r[ce]);
  }
  if (steps.empty()) throw Error(dir + ": diagnostics are empty");

  CheckRow mass{run, "mass_conservation", true, false, 0.0, 1e-12};
  for (std::size_t k = 1; k < steps.size(); ++k)
    for (const auto& [name, m] : steps[k].mass) {
      const double prev = steps[k - 1].mass.at(name);
      mass.value = std::max(mass.value, std::abs(m - prev) / std::max(prev, 1e-300));
    }
  mass.pass = mass.value < mass.threshold;
  rows.push_back(mass);

  CheckRow pos{run, "positivity", true, false, 0.0, 0.0};
  double cmin = std::numeric_limits<double>::infinity();
  for (long step : meta.steps)
    for (const auto& name : meta.species)
      for (double v : read_snapshot((fs::path(dir) / snapshot_name(meta.run, name, step)).string()).values)
        if (!std::isnan(v)) cmin = std::min(cmin, v);
  pos.skipped = meta.steps.empty();
  pos.value = pos.skipped ? 0.0 : cmin;
  pos.pass = pos.skipped || cmin >= 0.0;
  rows.push_back(pos);

  CheckRow ent{run, "entropy_nonnegative", true, false, 0.0, 0.0};
  ent.value = std::numeric_limits<double>::infinity();
  for (const auto& s : steps)
    for (const auto& [_, e] : s.entropy) ent.value = std::min(ent.value, e);
  ent.pass = ent.value >= 0.0;
  rows.push_back(ent);

  const bool dissipative = meta.zero_boundary_charge;
  CheckRow fe{run, "free_energy_decay", true, !dissipative, 0.0, 1e-8};
  CheckRow eb{run, "entropy_bound", true, !dissipative, 0.0, 1e-8};
  if (dissipative) {
    auto total_entropy = [](const Step& s) {
      double e = 0.0;
      for (const auto& [_, v] : s.entropy) e += v;
      return e;
    };
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < steps.size(); ++k) worst = std::max(worst, steps[k].free - steps[k - 1].free);
    fe.value = steps.size() > 1 ? worst : 0.0;
    fe.pass = fe.value <= fe.threshold;
    const double e0 = total_entropy(steps.front()), d0 = steps.front().dirichlet;
    double excess = -std::numeric_limits<double>::infinity();
    for (const auto& s : steps) excess = std::max(excess, total_entropy(s) - e0 - 0.5 * (d0 - s.dirichlet));
    eb.value = excess;
    eb.pass = excess <= eb.threshold;
  }
  rows.push_back(fe);
  rows.push_back(eb);

  CheckRow cc{run, "compatibility", true, !meta.poisson, 0.0, 1e-9};
  if (meta.poisson) {
    for (const auto& s : steps) cc.value = std::max(cc.value, std::abs(s.compat) / std::max(1.0, meta.compat_scale));
    cc.pass = cc.value <= cc.threshold;
  }
  rows.push_back(cc);
  return rows;
}

}  // namespace

std::vector<CheckRow> check_directory(const std::string& dir) {
  if (fs::exists(fs::path(dir) / "run.json")) return check_run(dir);
  std::vector<fs::path> subs;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && fs::exists(e.path() / "run.json")) subs.push_back(e.path());
  if (subs.empty()) throw Error(dir + ": no run.json found");
  std::sort(subs.begin(), subs.end());
  std::vector<CheckRow> rows;
  for (const auto& s : subs) {
    auto r = check_run(s.string());
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

int orchestrate(const std::string& command, const RunConfig& cfg, const RunOptions& opts) {
  const std::string dir = out_dir_of(cfg, opts);
  if (command == "check") {
    const auto rows = check_directory(dir);
    CsvTable t({"run", "check", "status", "value", "threshold"});
    bool ok = true;
    for (const auto& r : rows) {
      const char* status = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
      ok = ok && r.pass;
      t.add_row({r.run, r.check, status, format_double(r.value), format_double(r.threshold)});
      log_info(r.run + " " + r.check + ": " + status);
    }
    t.write_file((fs::path(dir) / "check_report.csv").string());
    return ok ? 0 : 1;
  }

  fs::create_directories(dir);
  if (command == "cell") {
    const CellGrid cell = cfg.cell_grid();
    const HomTensor ht = compute_hom_tensor(cell, cfg.cell_solver(), opts.threads > 1);
    cell_table(cell, ht).write_file((fs::path(dir) / "cell.csv").string());
    return 0;
  }
  if (command == "homog") {
    if (cfg.species.empty()) throw ConfigError("species: homog needs at least one species");
    const CellGrid cell = cfg.cell_grid();
    const HomTensor ht = compute_hom_tensor(cell, cfg.cell_solver(), opts.threads > 1);
    cell_table(cell, ht).write_file((fs::path(dir) / "cell.csv").string());
    const PnpSolver solver(macro_model_for(cfg, cell, ht, cfg.resolution));
    const Trajectory tr = run_transient(solver, cfg.time_grid());
    write_trajectory(dir, "homog", solver, tr, cfg.snapshots);
    const double r = two_scale_cell_residual(cell, ht.cell_solutions, solver.grid(), tr.states.back().c[0]);
    log_info("two-scale cell residual " + format_double(r));
    if (r > 1e-8) {
      log_error("two-scale cell residual " + format_double(r) + " exceeds 1e-8");
      return 1;
    }
    return 0;
  }
  if (command == "micro") {
    if (cfg.species.empty()) throw ConfigError("species: micro needs at least one species");
    if (!cfg.epsilon) throw ConfigError("geometry.epsilon: required for micro");
    const PerforatedGrid pg = build_perforated_grid(*cfg.epsilon, converge_cell(cfg));
    const PnpSolver solver(micro_model_for(cfg, pg));
    const Trajectory tr = run_transient(solver, cfg.time_grid());
    write_trajectory(dir, "micro", solver, tr, cfg.snapshots);
    return 0;
  }
  if (command == "converge") {
    const ConvergeResult res = run_converge(cfg, opts.threads, dir);
    if (!res.c_decreasing) log_error("concentration error is not strictly decreasing in epsilon");
    if (!res.phi_decreasing) log_error("potential error is not strictly decreasing in epsilon");
    return res.c_decreasing && res.phi_decreasing && res.two_scale_residual <= 1e-8 ? 0 : 1;
  }
  if (command == "app-pnp-sweep") {
    const auto rows = run_app_sweep(cfg);
    std::vector<std::string> header{"eta"};
    for (const auto& s : cfg.species) header.push_back("difference_L1L2_c_" + s.name);
    header.push_back("difference_total");
    CsvTable t(header);
    for (const auto& r : rows) {
      std::vector<std::string> cells{format_double(r.eta)};
      for (double v : r.difference) cells.push_back(format_double(v));
      cells.push_back(format_double(r.total));
      t.add_row(cells);
    }
    t.write_file((fs::path(dir) / "app_pnp_sweep.csv").string());
    // Rows ordered by decreasing η must show decreasing differences.
    std::vector<EtaRow> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const EtaRow& a, const EtaRow& b) { return a.eta > b.eta; });
    for (std::size_t k = 1; k < sorted.size(); ++k)
      if (!(sorted[k].total < sorted[k - 1].total)) {
        log_error("app-PNP difference is not strictly decreasing in eta");
        return 1;
      }
    return 0;
  }
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace pnp
