#pragma once

namespace pnp {

/// B(x) = x / (e^x - 1), with B(0) = 1.
double bernoulli(double x);

/// Exponentially fitted flux density (per unit face length) from L to R for
/// J = -D (∇c + c ∇ψ), where ψ = z φ:
///   (D/h) [B(ψR - ψL) cL - B(ψL - ψR) cR].
double sg_face_flux(double c_left, double c_right, double psi_left, double psi_right, double d_face, double h);

}  // namespace pnp
