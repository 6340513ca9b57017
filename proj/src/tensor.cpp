#include "pnp/tensor.hpp"

#include "pnp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pnp {

std::array<double, 2> Matrix2::eigenvalues() const {
  const double off = 0.5 * (a12 + a21);
  const double mean = 0.5 * (a11 + a22);
  const double rad = std::hypot(0.5 * (a11 - a22), off);
  return {mean - rad, mean + rad};
}

DiffusionTensor DiffusionTensor::from_matrix(const Matrix2& m, double offdiag_tol) {
  const double scale = std::max(std::abs(m.a11), std::abs(m.a22));
  if (std::abs(m.a12) > offdiag_tol * scale || std::abs(m.a21) > offdiag_tol * scale) {
    throw ValidationError("tensor has off-diagonal entries; two-point fluxes need a diagonal tensor");
  }
  if (!(m.a11 > 0.0 && m.a22 > 0.0)) throw ValidationError("tensor diagonal must be positive");
  return {m.a11, m.a22};
}

}  // namespace pnp
