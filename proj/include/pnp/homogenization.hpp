#pragma once

#include "pnp/cell_problem.hpp"
#include "pnp/geometry.hpp"
#include "pnp/poisson.hpp"
#include "pnp/transient.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace pnp {

/// Homogenized PNP system on the unperforated unit square.
struct MacroModel {
  HomTensor tensor;
  /// x ↦ |Y^f|^{-1} ∫_Γ ξ1(x, y) dS(y), added to the Poisson source.
  std::function<double(double, double)> charge_offset;
  /// x ↦ ξ2(x) / |Y^f|, the Neumann datum A_hom ∇φ0·ν on ∂Ω.
  std::function<double(double, double)> boundary_flux;
  std::vector<SpeciesParams> species;
  bool zero_boundary_charge = true;
};

MacroModel build_macro_model(const CellGrid& cell, const HomTensor& ht, const BoundaryCharge& bc,
                             std::vector<SpeciesParams> species);

/// Discretizes the macro model on an n x n full grid: D_i A_hom in transport,
/// A_hom in Poisson. A_hom must be diagonal.
PnpModel to_pnp_model(const MacroModel& macro, int resolution, const AppPnpParams& app = {},
                      const StepControl& control = {});

/// Cell-centered gradient of a field on a full grid: central differences
/// inside, second-order one-sided differences on the first and last rows.
std::array<std::vector<double>, 2> macro_gradient(const FluidGrid& full, std::span<const double> u);

/// Cell-centered gradient of a field on a perforated grid from face quotients;
/// boundary faces take their value from the Neumann datum ∇u·ν (empty = 0).
std::array<std::vector<double>, 2> fine_gradient(const FluidGrid& grid, std::span<const double> u,
                                                 std::span<const double> boundary_flux = {});

enum class CellSampling { nearest, bilinear };

struct CorrectorField {
  std::vector<double> value;                   // u0 + ε Σ ∂_k u0 w_k(x/ε)
  std::array<std::vector<double>, 2> gradient;  // ∇u0 + Σ ∂_k u0 ∇_y w_k(x/ε)
  std::array<std::vector<double>, 2> plain_gradient;  // ∇u0
};

/// First-order two-scale reconstruction of a macro field at the fluid-cell
/// centers of `fine`. Throws ValidationError if `epsilon` differs from the
/// period of `fine`.
CorrectorField reconstruct_corrector(const FluidGrid& macro, std::span<const double> u0, const CellGrid& cell,
                                     const std::array<CellSolution, 2>& sols, const PerforatedGrid& fine,
                                     double epsilon, CellSampling sampling = CellSampling::nearest);

/// (Σ_fluid |a - b|^2 h^2)^{1/2} for vector fields.
double gradient_error(const FluidGrid& grid, const std::array<std::vector<double>, 2>& a,
                      const std::array<std::vector<double>, 2>& b);

using TwoScaleTest = std::function<double(double, double, double, double)>;

/// Midpoint quadrature of ∫ u_ε(x) ψ(x, x/ε) dx over the fluid cells.
double two_scale_pairing(const FluidGrid& grid, std::span<const double> u, const TwoScaleTest& psi, double epsilon);

/// Inserts c1 = Σ_k ∂_k c0 w_k into the discrete cell equation for every
/// macro gradient of `u0` and returns the largest relative residual
/// ‖A c1 - b(∇c0)‖ / ‖b(∇c0)‖.
double two_scale_cell_residual(const CellGrid& cell, const std::array<CellSolution, 2>& sols,
                               const FluidGrid& macro, std::span<const double> u0);

}  // namespace pnp
