#include "pnp/cutoff.hpp"

#include "pnp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pnp {

namespace {

constexpr int kQuadratureNodes = 128;
constexpr double kKernelRadius = 0.5;

// Gauss–Legendre nodes/weights on [-1,1] by Newton iteration on P_n; nodes
// are generated in ± pairs so odd moments of even integrands cancel exactly.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

CutoffFunction::CutoffFunction(double k) : k_(k) {
  gauss_legendre(kQuadratureNodes, nodes_, weights_);
  // Normalise the kernel with the same rule used for the convolution.
  double total = 0.0;
  for (int q = 0; q < kQuadratureNodes; ++q) total += weights_[q] * kKernelRadius * kernel(kKernelRadius * nodes_[q]);
  norm_ = 1.0 / total;
}

CutoffFunction build_cutoff(double k) {
  if (!(k > 1.0)) throw ValidationError("cut-off height K must exceed 1");
  return CutoffFunction(k);
}

double CutoffFunction::kernel(double s) const {
  const double t = s / kKernelRadius;
  if (std::abs(t) >= 1.0) return 0.0;
  return norm_ * std::exp(-1.0 / (1.0 - t * t));
}

double CutoffFunction::profile(double r) const {
  if (r < k_ + 1.0) return r;
  if (r <= k_ + 2.0) return k_ + 1.0;
  if (r <= 2.0 * k_ + 3.0) return 2.0 * k_ + 3.0 - r;
  return 0.0;
}

double CutoffFunction::profile_slope(double r) const {
  if (r < k_ + 1.0) return 1.0;
  if (r <= k_ + 2.0) return 0.0;
  if (r <= 2.0 * k_ + 3.0) return -1.0;
  return 0.0;
}

// ∫ f(r - s) ρ(s) ds over |s| < 1/2, splitting the interval at the corners of
// F_K so every piece has a smooth integrand.
template <class F>
double CutoffFunction::convolve(F&& f, double r) const {
  double cuts[5] = {-kKernelRadius, 0, 0, 0, kKernelRadius};
  int m = 1;
  for (double corner : {k_ + 1.0, k_ + 2.0, 2.0 * k_ + 3.0}) {
    const double s = r - corner;
    if (s > -kKernelRadius && s < kKernelRadius) cuts[m++] = s;
  }
  cuts[m] = kKernelRadius;
  std::sort(cuts, cuts + m + 1);
  double total = 0.0;
  for (int piece = 0; piece < m; ++piece) {
    const double a = cuts[piece];
    const double b = cuts[piece + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (int q = 0; q < kQuadratureNodes; ++q) {
      const double x = mid + half * nodes_[q];
      s += weights_[q] * f(r - x) * kernel(x);
    }
    total += half * s;
  }
  return total;
}

double CutoffFunction::value(double r) const {
  return convolve([this](double u) { return profile(u); }, r);
}

double CutoffFunction::derivative(double r) const {
  return convolve([this](double u) { return profile_slope(u); }, r);
}

double CutoffFunction::second_derivative(double r) const {
  // F_K'' is a sum of Dirac masses at the corners: -δ(K+1) - δ(K+2) + δ(2K+3).
  return -kernel(r - (k_ + 1.0)) - kernel(r - (k_ + 2.0)) + kernel(r - (2.0 * k_ + 3.0));
}

}  // namespace pnp
