#include "pnp/diagnostics.hpp"
#include "pnp/errors.hpp"
#include "pnp/poisson.hpp"
#include "pnp/scharfetter_gummel.hpp"
#include "pnp/transient.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace pnp;

namespace {

long double bernoulli_ref(long double x) { return x == 0.0L ? 1.0L : x / std::expm1(x); }

// Lookup of a grid field by coordinates, to feed stored fields back as c0.
std::function<double(double, double)> as_function(const FluidGrid& g, std::vector<double> field) {
  const int n = g.resolution();
  const FluidGrid* gp = &g;
  return [gp, n, field = std::move(field)](double x1, double x2) {
    const int i = std::min(n - 1, static_cast<int>(x1 * n));
    const int j = std::min(n - 1, static_cast<int>(x2 * n));
    return field[static_cast<std::size_t>(gp->fluid_index(i, j))];
  };
}

PnpModel two_species(int n, std::function<double(double, double)> c1, std::function<double(double, double)> c2) {
  PnpModel m;
  m.grid = std::make_shared<const FluidGrid>(build_full_grid(n));
  SpeciesParams a;
  a.name = "p";
  a.z = 1;
  a.initial = std::move(c1);
  SpeciesParams b;
  b.name = "m";
  b.z = -1;
  b.initial = std::move(c2);
  m.species = {a, b};
  return m;
}

double blob(double x, double y, double x0) { return 0.1 + std::exp(-((x - x0) * (x - x0) + (y - 0.5) * (y - 0.5)) / 0.01); }

}  // namespace

TEST_CASE("Bernoulli function against extended precision") {
  for (double x : {-50.0, -3.0, -0.5, -1e-3, -1.01e-4, -0.99e-4, -1e-8, 0.0, 1e-8, 0.99e-4, 1.01e-4, 1e-3, 0.5, 3.0,
                   50.0, 700.0}) {
    CHECK(bernoulli(x) == doctest::Approx(static_cast<double>(bernoulli_ref(x))).epsilon(1e-14));
    // B(-x) - B(x) = x.
    CHECK(bernoulli(-x) - bernoulli(x) == doctest::Approx(x).epsilon(1e-12).scale(1.0));
  }
  CHECK(bernoulli(0.0) == 1.0);
  CHECK(bernoulli(-800.0) == doctest::Approx(800.0));
}

TEST_CASE("Scharfetter-Gummel flux limits") {
  // Equal potentials: plain central diffusion.
  CHECK(sg_face_flux(2.0, 1.0, 0.3, 0.3, 1.5, 0.1) == doctest::Approx(1.5 * (2.0 - 1.0) / 0.1));
  // Boltzmann pair has zero flux.
  const double dpsi = 0.7;
  CHECK(std::abs(sg_face_flux(1.0, std::exp(-dpsi), 0.0, dpsi, 1.0, 0.1)) < 1e-14);
  // Antisymmetry under swapping the cells.
  CHECK(sg_face_flux(1.3, 0.4, 0.2, -0.5, 1.0, 0.05) == doctest::Approx(-sg_face_flux(0.4, 1.3, -0.5, 0.2, 1.0, 0.05)));
}

TEST_CASE("Neumann Poisson: second-order manufactured solution with anisotropy") {
  // u = cos(pi x1) cos(pi x2) + 0.5 x1^2 x2, A = diag(2, 1).
  const double a1 = 2.0, a2 = 1.0;
  auto u = [](double x, double y) { return std::cos(M_PI * x) * std::cos(M_PI * y) + 0.5 * x * x * y; };
  auto f = [&](double x, double y) {
    return (a1 + a2) * M_PI * M_PI * std::cos(M_PI * x) * std::cos(M_PI * y) - a1 * y;
  };
  auto ux = [](double x, double y) { return -M_PI * std::sin(M_PI * x) * std::cos(M_PI * y) + x * y; };
  auto uy = [](double x, double y) { return -M_PI * std::cos(M_PI * x) * std::sin(M_PI * y) + 0.5 * x * x; };
  std::vector<double> errors;
  for (int n : {32, 64, 128}) {
    const auto g = build_full_grid(n);
    auto rhs = g.sample(f);
    std::vector<double> flux;
    for (const auto& bf : g.boundary_faces())
      flux.push_back(bf.normal_sign * (bf.axis == Axis::x1 ? a1 * ux(bf.x1, bf.x2) : a2 * uy(bf.x1, bf.x2)));
    // Midpoint data are compatible only up to O(h^2): remove the discrete mean.
    const DiffusionTensor tensor{a1, a2};
    const PoissonSolver solver(g, tensor, SolverConfig{1e-12});
    const double res = solver.compatibility_residual(rhs, flux);
    for (auto& v : rhs) v -= res;
    const auto phi = solver.solve(rhs, flux).phi;
    auto exact = g.sample(u);
    double mean = 0.0;
    for (double v : exact) mean += v / exact.size();
    double e = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) e += std::pow(phi[k] - (exact[k] - mean), 2);
    errors.push_back(std::sqrt(e * g.cell_volume()));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double ratio = errors[k - 1] / errors[k];
    CHECK(ratio > 3.6);
    CHECK(ratio < 4.4);
  }
}

TEST_CASE("Poisson rejects incompatible data with the residual") {
  const auto g = build_full_grid(16);
  const PoissonSolver solver(g, DiffusionTensor::identity());
  std::vector<double> rhs(g.fluid_count(), 1.0);
  std::vector<double> flux(g.boundary_faces().size(), -0.25);
  CHECK(std::abs(solver.compatibility_residual(rhs, flux)) < 1e-14);
  CHECK_NOTHROW(solver.solve(rhs, flux));
  flux[0] += 1e-3;
  try {
    solver.solve(rhs, flux);
    FAIL("expected CompatibilityError");
  } catch (const CompatibilityError& e) {
    CHECK(std::abs(e.residual() - 1e-3 / 16) < 1e-12);
    CHECK(std::string(e.what()).find("compatibility residual") != std::string::npos);
  }
}

TEST_CASE("perforated Poisson: discrete flux balance of grain charges") {
  const auto pg = build_perforated_grid(0.25, InclusionSpec::square(0.5), 8);
  BoundaryCharge bc;
  bc.xi1 = [](double, double, double, double) { return 1.0; };
  const auto flux = micro_boundary_flux(pg.grid, bc, 0.25);
  // 16 grains of perimeter 2 eps, flux eps * xi1.
  double total = 0.0;
  for (std::size_t b = 0; b < flux.size(); ++b) total += flux[b] * pg.grid.spacing();
  CHECK(total == doctest::Approx(16 * 2 * 0.25 * 0.25));
}

TEST_CASE("pure diffusion matches the implicit Euler mode decay") {
  // z = 0: each cosine mode is multiplied by 1/(1 + dt lambda_h) per step.
  const int n = 32;
  const double dt = 2e-3, amp = 0.5;
  PnpModel m;
  m.grid = std::make_shared<const FluidGrid>(build_full_grid(n));
  SpeciesParams s;
  s.z = 0;
  s.diffusivity.constant = 0.7;
  s.initial = [amp](double x, double) { return 1.0 + amp * std::cos(M_PI * x); };
  m.species = {s};
  const PnpSolver solver(m);
  const auto tr = run_transient(solver, TimeGrid{10 * dt, dt, 1});
  const double h = 1.0 / n;
  const double lambda = 0.7 * 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2), 2);
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const double factor = std::pow(1.0 / (1.0 + dt * lambda), static_cast<double>(k));
    for (int q = 0; q < m.grid->fluid_count(); ++q) {
      const double expect = 1.0 + amp * factor * std::cos(M_PI * m.grid->center_x1(q));
      CHECK(tr.states[k].c[0][q] == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("reference run: mass, positivity, free energy") {
  const auto m = two_species(32, [](double x, double y) { return blob(x, y, 0.3); },
                             [](double x, double y) { return blob(x, y, 0.7); });
  const PnpSolver solver(m);
  const auto tr = run_transient(solver, TimeGrid{0.05, 1e-3, 1});
  REQUIRE(tr.diagnostics.size() == 51);
  for (std::size_t k = 1; k < tr.diagnostics.size(); ++k) {
    const auto& d = tr.diagnostics[k];
    const auto& p = tr.diagnostics[k - 1];
    for (int i = 0; i < 2; ++i) CHECK(std::abs(d.mass[i] - p.mass[i]) <= 1e-12 * p.mass[i]);
    CHECK(d.free_energy <= p.free_energy + 1e-8);
    CHECK(std::abs(d.compat_residual) < 1e-12);
    CHECK(d.gummel_iters >= 1);
  }
  for (const auto& s : tr.states)
    for (const auto& c : s.c)
      for (double v : c) CHECK(v >= 0.0);
}

TEST_CASE("uniform neutral state is stationary") {
  const auto m = two_species(16, [](double, double) { return 0.8; }, [](double, double) { return 0.8; });
  const PnpSolver solver(m);
  const auto s0 = solver.initial_state();
  const auto s1 = solver.advance_step(s0, 1e-2);
  for (int i = 0; i < 2; ++i)
    for (double v : s1.c[i]) CHECK(v == doctest::Approx(0.8).epsilon(1e-14));
  for (double v : s1.phi) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("Boltzmann equilibrium with boundary charge is stationary") {
  // Surface charge +s on x1 = 0 and -s on x1 = 1; c_i = A exp(-z_i phi) with phi
  // from the discrete Poisson-Boltzmann equation, solved here by Newton.
  const int n = 24;
  const double s = 0.8, amp = 1.0;
  auto grid = std::make_shared<const FluidGrid>(build_full_grid(n));
  const auto& g = *grid;
  std::vector<double> flux;
  for (const auto& bf : g.boundary_faces())
    flux.push_back(bf.axis == Axis::x1 ? (bf.normal_sign < 0 ? s : -s) : 0.0);
  const auto lap = assemble_neumann_laplacian(g, DiffusionTensor::identity());
  const double vol = g.cell_volume(), h = g.spacing();
  std::vector<double> bvec(g.fluid_count(), 0.0);
  for (std::size_t b = 0; b < flux.size(); ++b) bvec[g.boundary_faces()[b].cell] += flux[b] * h;
  std::vector<double> phi(g.fluid_count(), 0.0);
  for (int it = 0; it < 50; ++it) {
    const auto lphi = lap * phi;
    std::vector<double> r(phi.size());
    std::vector<SparseMatrix::Triplet> jt;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      r[k] = -(lphi[k] + vol * 2 * amp * std::sinh(phi[k]) - bvec[k]);
      jt.push_back({static_cast<int>(k), static_cast<int>(k), vol * 2 * amp * std::cosh(phi[k])});
    }
    const auto vals = lap.values();
    const auto offs = lap.row_offsets();
    const auto cols = lap.columns();
    for (int row = 0; row < lap.size(); ++row)
      for (int q = offs[row]; q < offs[row + 1]; ++q) jt.push_back({row, cols[q], vals[q]});
    const auto jac = SparseMatrix::from_triplets(lap.size(), jt);
    const auto dphi = solve_spd(jac, r, SolverConfig{1e-14}).x;
    double dmax = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      phi[k] += dphi[k];
      dmax = std::max(dmax, std::abs(dphi[k]));
    }
    if (dmax < 1e-14) break;
  }
  std::vector<double> cp(phi.size()), cm(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    cp[k] = amp * std::exp(-phi[k]);
    cm[k] = amp * std::exp(phi[k]);
  }
  CHECK(std::abs(phi.front() - phi.back()) > 0.1);  // nontrivial equilibrium

  PnpModel m;
  m.grid = grid;
  SpeciesParams a;
  a.z = 1;
  a.initial = as_function(g, cp);
  SpeciesParams b;
  b.z = -1;
  b.initial = as_function(g, cm);
  m.species = {a, b};
  m.boundary_flux = flux;
  m.zero_boundary_charge = false;
  m.control.poisson.rel_tol = 1e-13;
  const PnpSolver solver(m);
  auto st = solver.initial_state();
  double mean = 0.0;
  for (double v : phi) mean += v / phi.size();
  for (std::size_t k = 0; k < phi.size(); ++k) CHECK(st.phi[k] == doctest::Approx(phi[k] - mean).epsilon(1e-9));
  for (int step = 0; step < 5; ++step) st = solver.advance_step(st, 5e-3);
  for (std::size_t k = 0; k < phi.size(); ++k) {
    CHECK(st.c[0][k] == doctest::Approx(cp[k]).epsilon(1e-9));
    CHECK(st.c[1][k] == doctest::Approx(cm[k]).epsilon(1e-9));
  }
}

TEST_CASE("app-PNP: eta = 0 reproduces PNP, eta > 0 keeps the invariants") {
  auto m = two_species(24, [](double x, double y) { return blob(x, y, 0.35); },
                       [](double x, double y) { return blob(x, y, 0.65); });
  const auto base = run_transient(PnpSolver(m), TimeGrid{0.01, 1e-3, 10});
  AppPnpParams zero;
  zero.eta = 0.0;
  m.app = zero;
  const auto same = run_transient(PnpSolver(m), TimeGrid{0.01, 1e-3, 10});
  CHECK(same.states.back().c[0] == base.states.back().c[0]);

  m.app.eta = 0.5;
  const auto tr = run_transient(PnpSolver(m), TimeGrid{0.01, 1e-3, 1});
  for (std::size_t k = 1; k < tr.diagnostics.size(); ++k)
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(tr.diagnostics[k].mass[i] - tr.diagnostics[0].mass[i]) < 1e-12 * tr.diagnostics[0].mass[i]);
  for (const auto& s : tr.states)
    for (double v : s.c[0]) CHECK(v >= 0.0);
  // Stronger diffusion flattens the profile faster.
  double peak_app = 0.0, peak_base = 0.0;
  for (double v : tr.states.back().c[0]) peak_app = std::max(peak_app, v);
  for (double v : base.states.back().c[0]) peak_base = std::max(peak_base, v);
  CHECK(peak_app < peak_base);

  AppPnpParams bad;
  bad.p = 3.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.p = 4.0;
  bad.eta = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("variable diffusivity conserves mass and respects declared bounds") {
  auto m = two_species(16, [](double x, double y) { return blob(x, y, 0.3); },
                       [](double x, double y) { return blob(x, y, 0.7); });
  m.species[0].diffusivity.field = [](double t, double x1, double) { return 1.0 + 0.5 * x1 + t; };
  m.species[0].diffusivity.lower = 1.0;
  m.species[0].diffusivity.upper = 2.0;
  const auto tr = run_transient(PnpSolver(m), TimeGrid{0.01, 1e-3, 1});
  for (const auto& d : tr.diagnostics) CHECK(d.mass[0] == doctest::Approx(tr.diagnostics[0].mass[0]).epsilon(1e-13));

  m.species[0].diffusivity.upper = 1.2;
  CHECK_THROWS_AS(run_transient(PnpSolver(m), TimeGrid{0.01, 1e-3, 1}), ValidationError);
}

TEST_CASE("step failure: Gummel non-convergence after all halvings") {
  auto m = two_species(16, [](double x, double y) { return blob(x, y, 0.3); },
                       [](double x, double y) { return blob(x, y, 0.7); });
  m.control.gummel_max_iter = 1;
  m.control.gummel_tol = 1e-300;
  m.control.max_halvings = 2;
  const PnpSolver solver(m);
  CHECK_THROWS_AS(solver.advance_step(solver.initial_state(), 1e-3), StepError);
}

TEST_CASE("dt halving recovers a step the full dt cannot take") {
  auto m = two_species(16, [](double x, double y) { return blob(x, y, 0.3); },
                       [](double x, double y) { return blob(x, y, 0.7); });
  m.control.gummel_max_iter = 3;
  const PnpSolver solver(m);
  StepReport rep;
  const auto s = solver.advance_step(solver.initial_state(), 0.5, &rep);
  CHECK(rep.halvings > 0);
  CHECK(s.t == doctest::Approx(0.5));
}

TEST_CASE("invalid inputs") {
  auto m = two_species(8, [](double, double) { return -1.0; }, [](double, double) { return 1.0; });
  CHECK_THROWS_AS(PnpSolver(m).initial_state(), ValidationError);
  PnpModel empty;
  CHECK_THROWS_AS(PnpSolver{empty}, ValidationError);
  auto ok = two_species(8, [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
  const PnpSolver solver(ok);
  CHECK_THROWS_AS(solver.advance_step(solver.initial_state(), 0.0), ValidationError);
  CHECK_THROWS_AS(run_transient(solver, TimeGrid{-1.0, 1e-3, 1}), ValidationError);
  const auto tr = run_transient(solver, TimeGrid{0.0, 1e-3, 1});
  CHECK(tr.states.size() == 1);
}
