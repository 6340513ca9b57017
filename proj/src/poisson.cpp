#include "pnp/poisson.hpp"

#include "pnp/errors.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace pnp {

namespace {
std::atomic<std::size_t> solve_counter{0};

double fractional(double v) {
  double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}
}  // namespace

std::size_t poisson_solve_count() noexcept { return solve_counter.load(); }

std::vector<double> micro_boundary_flux(const FluidGrid& grid, const BoundaryCharge& bc, double epsilon) {
  std::vector<double> g;
  g.reserve(grid.boundary_faces().size());
  for (const auto& f : grid.boundary_faces()) {
    if (f.kind == BoundaryKind::outer) {
      g.push_back(bc.outer(f.x1, f.x2));
    } else {
      g.push_back(epsilon * bc.inclusion(f.x1, f.x2, fractional(f.x1 / epsilon), fractional(f.x2 / epsilon)));
    }
  }
  return g;
}

std::vector<double> macro_boundary_flux(const FluidGrid& grid, const BoundaryCharge& bc, double fluid_fraction) {
  std::vector<double> g;
  g.reserve(grid.boundary_faces().size());
  for (const auto& f : grid.boundary_faces()) {
    g.push_back(f.kind == BoundaryKind::outer ? bc.outer(f.x1, f.x2) / fluid_fraction : 0.0);
  }
  return g;
}

SparseMatrix assemble_neumann_laplacian(const FluidGrid& grid, const DiffusionTensor& tensor) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(grid.faces().size() * 4);
  for (const auto& f : grid.faces()) {
    const double a = tensor.along(static_cast<int>(f.axis));
    trip.push_back({f.left, f.left, a});
    trip.push_back({f.right, f.right, a});
    trip.push_back({f.left, f.right, -a});
    trip.push_back({f.right, f.left, -a});
  }
  return SparseMatrix::from_triplets(grid.fluid_count(), std::move(trip));
}

PoissonSolver::PoissonSolver(const FluidGrid& grid, DiffusionTensor tensor, SolverConfig cfg)
    : grid_(&grid), tensor_(tensor), cfg_(std::move(cfg)), matrix_(assemble_neumann_laplacian(grid, tensor)) {
  cfg_.null_space = NullSpace::constants;
  cfg_.weights = grid.volumes();
}

std::vector<double> PoissonSolver::rhs(std::span<const double> charge, std::span<const double> boundary_flux) const {
  const auto& grid = *grid_;
  if (static_cast<int>(charge.size()) != grid.fluid_count()) {
    throw ValidationError("Poisson: charge field size mismatch");
  }
  if (boundary_flux.size() != grid.boundary_faces().size() && !boundary_flux.empty()) {
    throw ValidationError("Poisson: boundary flux size mismatch");
  }
  const double vol = grid.cell_volume();
  const double h = grid.spacing();
  std::vector<double> b(charge.size());
  for (std::size_t k = 0; k < charge.size(); ++k) b[k] = charge[k] * vol;
  if (!boundary_flux.empty()) {
    const auto& faces = grid.boundary_faces();
    for (std::size_t f = 0; f < faces.size(); ++f) b[faces[f].cell] += boundary_flux[f] * h;
  }
  return b;
}

double PoissonSolver::compatibility_residual(std::span<const double> charge,
                                             std::span<const double> boundary_flux) const {
  double sum = 0.0;
  for (double v : rhs(charge, boundary_flux)) sum += v;
  return sum;
}

PoissonResult PoissonSolver::solve(std::span<const double> charge, std::span<const double> boundary_flux,
                                   std::span<const double> guess) const {
  ++solve_counter;
  const auto b = rhs(charge, boundary_flux);
  double sum = 0.0;
  double scale = 0.0;
  for (double v : b) {
    sum += v;
    scale += std::abs(v);
  }
  if (std::abs(sum) > 1e-9 * std::max(scale, std::numeric_limits<double>::min())) {
    throw CompatibilityError("Poisson data violate the Neumann compatibility condition", sum);
  }
  auto result = solve_spd(matrix_, b, cfg_, guess);
  return {std::move(result.x), std::move(result.stats)};
}

std::vector<double> poisson_solve(const FluidGrid& grid, const DiffusionTensor& tensor,
                                  std::span<const double> charge, std::span<const double> boundary_flux,
                                  const SolverConfig& cfg) {
  return PoissonSolver(grid, tensor, cfg).solve(charge, boundary_flux).phi;
}

}  // namespace pnp
