#include "pnp/scharfetter_gummel.hpp"

#include <cmath>

namespace pnp {

double bernoulli(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0;
  }
  return x / std::expm1(x);
}

double sg_face_flux(double c_left, double c_right, double psi_left, double psi_right, double d_face, double h) {
  const double dpsi = psi_right - psi_left;
  return d_face / h * (bernoulli(dpsi) * c_left - bernoulli(-dpsi) * c_right);
}

}  // namespace pnp
