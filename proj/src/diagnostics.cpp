#include "pnp/diagnostics.hpp"

#include "pnp/errors.hpp"

#include <cmath>

namespace pnp {

double mass(const FluidGrid& grid, std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += v;
  return s * grid.cell_volume();
}

double entropy_functional(std::span<const double> c, std::span<const double> volumes) {
  if (c.size() != volumes.size()) throw ValidationError("entropy: field and volume sizes differ");
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double v = c[k];
    if (v < 0.0) throw ValidationError("entropy: negative concentration " + std::to_string(v));
    const double integrand = v == 0.0 ? 1.0 : v * std::log(v) - v + 1.0;
    s += integrand * volumes[k];
  }
  return s;
}

double dirichlet_energy(const FluidGrid& grid, std::span<const double> phi, const DiffusionTensor& tensor) {
  double s = 0.0;
  for (const auto& f : grid.faces()) {
    const double d = phi[f.right] - phi[f.left];
    s += tensor.along(static_cast<int>(f.axis)) * d * d;
  }
  return s;
}

double free_energy(const FluidGrid& grid, const std::vector<std::vector<double>>& c, std::span<const double> phi,
                   const DiffusionTensor& tensor) {
  double s = 0.0;
  for (const auto& ci : c) {
    for (double v : ci) {
      if (v > 0.0) s += v * std::log(v);
    }
  }
  return s * grid.cell_volume() + 0.5 * dirichlet_energy(grid, phi, tensor);
}

namespace {

template <class Op>
double charge_balance(const FluidGrid& grid, std::span<const int> charges, const std::vector<std::vector<double>>& c,
                      std::span<const double> fixed_charge, std::span<const double> boundary_flux, Op op) {
  if (charges.size() != c.size()) throw ValidationError("compatibility: charge list and species differ");
  const double vol = grid.cell_volume();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double m = 0.0;
    for (double v : c[i]) m += v;
    s += op(charges[i] * m * vol);
  }
  for (double v : fixed_charge) s += op(v * vol);
  const double h = grid.spacing();
  for (double g : boundary_flux) s += op(g * h);
  return s;
}

double time_weight(std::span<const double> times, std::size_t k) {
  double w = 0.0;
  if (k > 0) w += 0.5 * (times[k] - times[k - 1]);
  if (k + 1 < times.size()) w += 0.5 * (times[k + 1] - times[k]);
  return w;
}

std::vector<double> pointwise_errors(const FluidGrid& fine, std::span<const double> times,
                                     const std::vector<std::vector<double>>& fine_values, const FluidGrid& macro,
                                     const std::vector<std::vector<double>>& macro_values) {
  if (fine_values.size() != times.size() || macro_values.size() != times.size()) {
    throw ValidationError("trajectory comparison: time grids do not match");
  }
  std::vector<double> err(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto sampled = resample_bilinear(macro, macro_values[k], fine);
    double s = 0.0;
    for (int q = 0; q < fine.fluid_count(); ++q) {
      const double d = fine_values[k][q] - sampled[q];
      s += d * d;
    }
    err[k] = std::sqrt(s * fine.cell_volume());
  }
  return err;
}

}  // namespace

double compatibility_residual(const FluidGrid& grid, std::span<const int> charges,
                              const std::vector<std::vector<double>>& c, std::span<const double> fixed_charge,
                              std::span<const double> boundary_flux) {
  return charge_balance(grid, charges, c, fixed_charge, boundary_flux, [](double v) { return v; });
}

double compatibility_scale(const FluidGrid& grid, std::span<const int> charges,
                           const std::vector<std::vector<double>>& c, std::span<const double> fixed_charge,
                           std::span<const double> boundary_flux) {
  return charge_balance(grid, charges, c, fixed_charge, boundary_flux, [](double v) { return std::abs(v); });
}

double l2_norm(const FluidGrid& grid, std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s * grid.cell_volume());
}

double error_L1L2(const FluidGrid& fine, std::span<const double> times,
                  const std::vector<std::vector<double>>& fine_values, const FluidGrid& macro,
                  const std::vector<std::vector<double>>& macro_values) {
  const auto err = pointwise_errors(fine, times, fine_values, macro, macro_values);
  double total = 0.0;
  for (std::size_t k = 0; k < err.size(); ++k) total += time_weight(times, k) * err[k];
  return total;
}

double error_L2L2(const FluidGrid& fine, std::span<const double> times,
                  const std::vector<std::vector<double>>& fine_values, const FluidGrid& macro,
                  const std::vector<std::vector<double>>& macro_values) {
  const auto err = pointwise_errors(fine, times, fine_values, macro, macro_values);
  double total = 0.0;
  for (std::size_t k = 0; k < err.size(); ++k) total += time_weight(times, k) * err[k] * err[k];
  return std::sqrt(total);
}

}  // namespace pnp

namespace pnp {

double difference_L1L2(const FluidGrid& grid, std::span<const double> times, const std::vector<std::vector<double>>& a,
                       const std::vector<std::vector<double>>& b) {
  if (a.size() != times.size() || b.size() != times.size())
    throw ValidationError("trajectories and time grid differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (a[k].size() != b[k].size()) throw ValidationError("snapshot sizes differ");
    double s = 0.0;
    for (std::size_t q = 0; q < a[k].size(); ++q) s += (a[k][q] - b[k][q]) * (a[k][q] - b[k][q]);
    total += time_weight(times, k) * std::sqrt(s * grid.cell_volume());
  }
  return total;
}

}  // namespace pnp
