#pragma once

#include "pnp/cell_problem.hpp"
#include "pnp/geometry.hpp"
#include "pnp/sparse.hpp"
#include "pnp/tensor.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pnp {

/// ξ2(x1, x2): surface charge on the outer boundary ∂Ω.
using BoundaryField = std::function<double(double, double)>;

/// Neumann data of the potential. Empty functions mean zero charge.
struct BoundaryCharge {
  SurfaceCharge xi1;
  BoundaryField xi2;

  double inclusion(double x1, double x2, double y1, double y2) const {
    return xi1 ? xi1(x1, x2, y1, y2) : 0.0;
  }
  double outer(double x1, double x2) const { return xi2 ? xi2(x1, x2) : 0.0; }
};

/// Per-boundary-face Neumann flux ∇φ·ν on Ω_ε: ε ξ1(x, x/ε) on grain faces,
/// ξ2(x) on ∂Ω faces.
std::vector<double> micro_boundary_flux(const FluidGrid& grid, const BoundaryCharge& bc, double epsilon);

/// Per-boundary-face flux A_hom ∇φ0·ν = ξ2(x) / |Y^f| on ∂Ω.
std::vector<double> macro_boundary_flux(const FluidGrid& grid, const BoundaryCharge& bc, double fluid_fraction);

struct PoissonResult {
  std::vector<double> phi;
  SolveStats stats;
};

/// Two-point finite-volume discretization of -∇·(A∇φ) = f with prescribed
/// Neumann fluxes and the zero-mean gauge. The grid must outlive the solver.
class PoissonSolver {
 public:
  PoissonSolver(const FluidGrid& grid, DiffusionTensor tensor, SolverConfig cfg = {});

  /// Σ f·vol + Σ g·len; zero for a solvable problem.
  double compatibility_residual(std::span<const double> charge, std::span<const double> boundary_flux) const;

  /// Throws CompatibilityError if the residual exceeds 1e-9 relative to the
  /// magnitude of the data.
  PoissonResult solve(std::span<const double> charge, std::span<const double> boundary_flux,
                      std::span<const double> guess = {}) const;

  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const DiffusionTensor& tensor() const noexcept { return tensor_; }
  const FluidGrid& grid() const noexcept { return *grid_; }

 private:
  std::vector<double> rhs(std::span<const double> charge, std::span<const double> boundary_flux) const;

  const FluidGrid* grid_;
  DiffusionTensor tensor_;
  SolverConfig cfg_;
  SparseMatrix matrix_;
};

/// Stiffness matrix Σ_faces a_axis (φ_K - φ_L)^2 shared by Poisson and the
/// energy diagnostics.
SparseMatrix assemble_neumann_laplacian(const FluidGrid& grid, const DiffusionTensor& tensor);

std::vector<double> poisson_solve(const FluidGrid& grid, const DiffusionTensor& tensor,
                                  std::span<const double> charge, std::span<const double> boundary_flux,
                                  const SolverConfig& cfg = {});

/// Number of Poisson solves attempted in this process.
std::size_t poisson_solve_count() noexcept;

}  // namespace pnp
