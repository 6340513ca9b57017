#include "pnp/cell_problem.hpp"

#include "pnp/errors.hpp"

#include <cmath>
#include <future>

namespace pnp {

namespace {

struct PeriodicSystem {
  std::vector<int> compact;  // grid cell -> fluid index or -1
  std::vector<int> cells;    // fluid index -> grid cell
  SparseMatrix matrix;
};

PeriodicSystem assemble(const CellGrid& grid) {
  const int n = grid.resolution();
  PeriodicSystem sys;
  sys.compact.assign(static_cast<std::size_t>(n) * n, -1);
  for (int c = 0; c < n * n; ++c) {
    if (grid.mask()[c]) {
      sys.compact[c] = static_cast<int>(sys.cells.size());
      sys.cells.push_back(c);
    }
  }
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(sys.cells.size() * 5);
  for (int k = 0; k < static_cast<int>(sys.cells.size()); ++k) {
    const int i = sys.cells[k] % n;
    const int j = sys.cells[k] / n;
    const int nb[4] = {grid.index(i + 1, j), grid.index(i - 1, j), grid.index(i, j + 1), grid.index(i, j - 1)};
    double diag = 0.0;
    for (int c : nb) {
      const int l = sys.compact[c];
      if (l < 0) continue;
      trip.push_back({k, l, -1.0});
      diag += 1.0;
    }
    trip.push_back({k, k, diag});
  }
  sys.matrix = SparseMatrix::from_triplets(static_cast<int>(sys.cells.size()), std::move(trip));
  return sys;
}

}  // namespace

CellSolution solve_cell_problem(const CellGrid& grid, Axis direction, const SolverConfig& cfg) {
  const int n = grid.resolution();
  const double h = grid.spacing();
  const auto sys = assemble(grid);
  const int m = static_cast<int>(sys.cells.size());

  // e_k enters as a flux h·(e_k·n) across every fluid–fluid face.
  std::vector<double> rhs(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const int i = sys.cells[k] % n;
    const int j = sys.cells[k] / n;
    if (direction == Axis::x1) {
      if (grid.is_fluid(i + 1, j)) rhs[k] += h;
      if (grid.is_fluid(i - 1, j)) rhs[k] -= h;
    } else {
      if (grid.is_fluid(i, j + 1)) rhs[k] += h;
      if (grid.is_fluid(i, j - 1)) rhs[k] -= h;
    }
  }

  SolverConfig spd = cfg;
  spd.null_space = NullSpace::constants;
  spd.weights.clear();
  auto result = solve_spd(sys.matrix, rhs, spd);

  CellSolution sol;
  sol.direction = direction;
  sol.w.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < m; ++k) sol.w[sys.cells[k]] = result.x[k];
  sol.stats = std::move(result.stats);
  return sol;
}

CellGradient cell_gradient(const CellGrid& grid, const CellSolution& sol) {
  const int n = grid.resolution();
  const double h = grid.spacing();
  const double e1 = sol.direction == Axis::x1 ? 1.0 : 0.0;
  const double e2 = 1.0 - e1;
  CellGradient g;
  g.g1.assign(static_cast<std::size_t>(n) * n, 0.0);
  g.g2.assign(static_cast<std::size_t>(n) * n, 0.0);
  const auto& w = sol.w;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c = grid.index(i, j);
      if (!grid.is_fluid(i, j)) continue;
      const int east = grid.index(i + 1, j);
      const int west = grid.index(i - 1, j);
      const int north = grid.index(i, j + 1);
      const int south = grid.index(i, j - 1);
      const double qe = grid.mask()[east] ? (w[east] - w[c]) / h : -e1;
      const double qw = grid.mask()[west] ? (w[c] - w[west]) / h : -e1;
      const double qn = grid.mask()[north] ? (w[north] - w[c]) / h : -e2;
      const double qs = grid.mask()[south] ? (w[c] - w[south]) / h : -e2;
      g.g1[c] = 0.5 * (qe + qw);
      g.g2[c] = 0.5 * (qn + qs);
    }
  }
  return g;
}

HomTensor homogenized_tensor(const CellGrid& grid, std::array<CellSolution, 2> sols) {
  const int n = grid.resolution();
  const double h2 = grid.spacing() * grid.spacing();
  const double fraction = fluid_volume_fraction(grid);
  double col[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (int k = 0; k < 2; ++k) {
    const auto g = cell_gradient(grid, sols[k]);
    const double ek1 = sols[k].direction == Axis::x1 ? 1.0 : 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int c = 0; c < n * n; ++c) {
      if (!grid.mask()[c]) continue;
      s1 += (g.g1[c] + ek1) * h2;
      s2 += (g.g2[c] + 1.0 - ek1) * h2;
    }
    const int idx = sols[k].direction == Axis::x1 ? 0 : 1;
    col[idx][0] = s1 / fraction;
    col[idx][1] = s2 / fraction;
  }
  HomTensor out;
  out.a = Matrix2{col[0][0], col[1][0], col[0][1], col[1][1]};
  out.fluid_fraction = fraction;
  out.cell_solutions = std::move(sols);
  return out;
}

HomTensor compute_hom_tensor(const CellGrid& grid, const SolverConfig& cfg, bool parallel) {
  if (parallel) {
    auto second = std::async(std::launch::async, [&] { return solve_cell_problem(grid, Axis::x2, cfg); });
    auto first = solve_cell_problem(grid, Axis::x1, cfg);
    return homogenized_tensor(grid, {std::move(first), second.get()});
  }
  auto first = solve_cell_problem(grid, Axis::x1, cfg);
  auto second = solve_cell_problem(grid, Axis::x2, cfg);
  return homogenized_tensor(grid, {std::move(first), std::move(second)});
}

double boundary_charge_average(const CellGrid& grid, const SurfaceCharge& xi1, double x1, double x2) {
  if (grid.inclusion().kind == InclusionSpec::Kind::none) return 0.0;
  double total = 0.0;
  for (const auto& s : inclusion_boundary_segments(grid)) total += xi1(x1, x2, s.y1, s.y2) * s.length;
  return total / fluid_volume_fraction(grid);
}

}  // namespace pnp
