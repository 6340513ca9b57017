#pragma once

#include <array>

namespace pnp {

struct Matrix2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 1.0;

  static Matrix2 identity() { return {}; }
  /// Eigenvalues of the symmetric part, ascending.
  std::array<double, 2> eigenvalues() const;
};

/// Axis-aligned coefficients used by the two-point flux discretization:
/// x1-faces carry a11, x2-faces a22.
struct DiffusionTensor {
  double a11 = 1.0;
  double a22 = 1.0;

  static DiffusionTensor identity() { return {}; }
  /// Throws ValidationError when |a12|, |a21| exceed `offdiag_tol` times the
  /// largest diagonal entry; two-point fluxes cannot represent them.
  static DiffusionTensor from_matrix(const Matrix2& m, double offdiag_tol = 1e-8);

  double along(int axis) const noexcept { return axis == 0 ? a11 : a22; }
};

}  // namespace pnp
