#pragma once

#include "pnp/geometry.hpp"
#include "pnp/poisson.hpp"
#include "pnp/tensor.hpp"

#include <span>
#include <vector>

namespace pnp {

/// Σ c·vol over fluid cells.
double mass(const FluidGrid& grid, std::span<const double> c);

/// Σ (c log c - c + 1)·vol, with the integrand equal to 1 at c = 0.
/// Throws ValidationError on negative entries.
double entropy_functional(std::span<const double> c, std::span<const double> volumes);

/// Σ_{fluid–fluid faces} a_axis ((φ_R - φ_L)/h)^2 h^2.
double dirichlet_energy(const FluidGrid& grid, std::span<const double> phi,
                        const DiffusionTensor& tensor = DiffusionTensor::identity());

/// Σ_i Σ c_i log c_i·vol + ½ dirichlet_energy.
double free_energy(const FluidGrid& grid, const std::vector<std::vector<double>>& c, std::span<const double> phi,
                   const DiffusionTensor& tensor);

/// Σ_i z_i Σ c_i·vol + Σ fixed·vol + Σ g·len: the discrete form of the global
/// charge balance. `fixed_charge` and `boundary_flux` may be empty.
double compatibility_residual(const FluidGrid& grid, std::span<const int> charges,
                              const std::vector<std::vector<double>>& c, std::span<const double> fixed_charge,
                              std::span<const double> boundary_flux);

/// Magnitude of the terms entering compatibility_residual; used to form
/// relative thresholds.
double compatibility_scale(const FluidGrid& grid, std::span<const int> charges,
                           const std::vector<std::vector<double>>& c, std::span<const double> fixed_charge,
                           std::span<const double> boundary_flux);

/// (Σ_fluid |u|^2 h^2)^{1/2}.
double l2_norm(const FluidGrid& grid, std::span<const double> u);

/// Trapezoidal-in-time ∫ ‖u_ε - u_0‖_{L²(Ω_ε)} dt. The macro field lives on
/// an unperforated grid and is sampled bilinearly at the fine cell centers.
double error_L1L2(const FluidGrid& fine, std::span<const double> times,
                  const std::vector<std::vector<double>>& fine_values, const FluidGrid& macro,
                  const std::vector<std::vector<double>>& macro_values);

/// Same comparison in L²(0,T; L²(Ω_ε)).
double error_L2L2(const FluidGrid& fine, std::span<const double> times,
                  const std::vector<std::vector<double>>& fine_values, const FluidGrid& macro,
                  const std::vector<std::vector<double>>& macro_values);

/// Trapezoidal ∫ ‖a - b‖_{L²} dt for two trajectories on the same grid.
double difference_L1L2(const FluidGrid& grid, std::span<const double> times, const std::vector<std::vector<double>>& a,
                       const std::vector<std::vector<double>>& b);

}  // namespace pnp
