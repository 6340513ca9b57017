#pragma once

#include <vector>

namespace pnp {

/// Smooth truncation G_K: G_K(r) = r on [0, K], G_K(r) = 0 for r > 2K + 4,
/// 0 ≤ G_K ≤ K + 1, with |G_K'| + |G_K''| bounded independently of K.
///
/// Built by mollifying the piecewise-linear profile
///   F_K(r) = r on [0, K+1),  K+1 on [K+1, K+2],  2K+3-r on (K+2, 2K+3],  0 beyond,
/// with the bump ρ(s) ∝ exp(-1/(1-4s²)) supported on |s| < 1/2. Each corner of
/// F_K is at least one unit away from the next, so the plateau and tail
/// windows survive the mollification unchanged.
class CutoffFunction {
 public:
  double height() const noexcept { return k_; }

  double value(double r) const;
  double derivative(double r) const;
  double second_derivative(double r) const;

  /// The piecewise-linear profile before mollification.
  double profile(double r) const;

 private:
  friend CutoffFunction build_cutoff(double k);
  explicit CutoffFunction(double k);

  double kernel(double s) const;
  double profile_slope(double r) const;
  template <class F>
  double convolve(F&& f, double r) const;

  double k_;
  double norm_ = 1.0;
  std::vector<double> nodes_;    // Gauss–Legendre on [-1, 1]
  std::vector<double> weights_;
};

/// Throws ValidationError unless K > 1.
CutoffFunction build_cutoff(double k);

}  // namespace pnp
