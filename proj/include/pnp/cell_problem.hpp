#pragma once

#include "pnp/geometry.hpp"
#include "pnp/sparse.hpp"
#include "pnp/tensor.hpp"

#include <array>
#include <functional>
#include <vector>

namespace pnp {

/// ξ1(x1, x2, y1, y2): surface charge on the inclusion boundary.
using SurfaceCharge = std::function<double(double, double, double, double)>;

/// Periodic cell-problem solution w_k, stored on all N*N cells (zero on solid
/// cells) with weighted mean zero over the fluid cells.
struct CellSolution {
  Axis direction = Axis::x1;
  std::vector<double> w;
  SolveStats stats;
};

/// Cell-centered ∇_y w_k reconstructed from face quotients; on a face shared
/// with a solid cell the no-flux condition (∇_y w_k + e_k)·ν = 0 supplies the value.
struct CellGradient {
  std::vector<double> g1;
  std::vector<double> g2;
};

struct HomTensor {
  Matrix2 a;
  double fluid_fraction = 1.0;
  std::array<CellSolution, 2> cell_solutions;
};

/// Finite-volume solution of -∇·(∇w_k + e_k) = 0 in Y^f, no flux on Γ, Y-periodic.
CellSolution solve_cell_problem(const CellGrid& grid, Axis direction, const SolverConfig& cfg = {});

CellGradient cell_gradient(const CellGrid& grid, const CellSolution& sol);

/// A e_k = |Y^f|^{-1} Σ_fluid (∇_y w_k + e_k) h².
HomTensor homogenized_tensor(const CellGrid& grid, std::array<CellSolution, 2> sols);

/// Solves both directions (optionally on two threads) and assembles A_hom.
HomTensor compute_hom_tensor(const CellGrid& grid, const SolverConfig& cfg = {}, bool parallel = false);

/// |Y^f|^{-1} ∫_Γ ξ1(x, y) dS(y) at the macroscopic point x.
double boundary_charge_average(const CellGrid& grid, const SurfaceCharge& xi1, double x1, double x2);

}  // namespace pnp
