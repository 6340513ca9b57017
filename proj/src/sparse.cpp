#include "pnp/sparse.hpp"

#include "pnp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pnp {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n) {
      throw ValidationError("sparse triplet index out of range");
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n_ = n;
  m.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  std::size_t t = 0;
  for (int row = 0; row < n; ++row) {
    while (t < triplets.size() && triplets[t].row == row) {
      const int col = triplets[t].col;
      double v = 0.0;
      while (t < triplets.size() && triplets[t].row == row && triplets[t].col == col) v += triplets[t++].value;
      if (v != 0.0) {
        m.cols_.push_back(col);
        m.values_.push_back(v);
      }
    }
    m.offsets_[row + 1] = static_cast<int>(m.cols_.size());
  }
  return m;
}

double SparseMatrix::coeff(int row, int col) const {
  const auto begin = cols_.begin() + offsets_[row];
  const auto end = cols_.begin() + offsets_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  return (it != end && *it == col) ? values_[it - cols_.begin()] : 0.0;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int row = 0; row < n_; ++row) {
    double s = 0.0;
    for (int k = offsets_[row]; k < offsets_[row + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[row] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (int row = 0; row < n_; ++row) d[row] = coeff(row, row);
  return d;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

int SolverConfig::iteration_limit(int n) const {
  if (max_iter > 0) return max_iter;
  return static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 200;
}

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ValidationError("solver rel_tol must lie in (0,1)");
  if (max_iter < 0) throw ValidationError("solver max_iter must be >= 1 (or 0 for the default)");
}

namespace {

std::vector<double> inverse_diagonal(const SparseMatrix& a, bool enabled) {
  std::vector<double> inv(a.size(), 1.0);
  if (!enabled) return inv;
  const auto d = a.diagonal();
  for (int i = 0; i < a.size(); ++i) {
    if (d[i] == 0.0) throw SolverError("Jacobi preconditioner: zero diagonal", 0, 0.0);
    inv[i] = 1.0 / d[i];
  }
  return inv;
}

void shift_to_weighted_mean_zero(std::vector<double>& x, const std::vector<double>& weights) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    num += w * x[i];
    den += w;
  }
  const double mean = num / den;
  for (double& v : x) v -= mean;
}

}  // namespace

SolveResult solve_spd(const SparseMatrix& a, std::span<const double> b_in, const SolverConfig& cfg,
                      std::span<const double> guess) {
  cfg.validate();
  const int n = a.size();
  if (static_cast<int>(b_in.size()) != n) throw ValidationError("solve_spd: rhs size mismatch");
  if (!cfg.weights.empty() && static_cast<int>(cfg.weights.size()) != n) {
    throw ValidationError("solve_spd: weight vector size mismatch");
  }

  std::vector<double> b(b_in.begin(), b_in.end());
  if (cfg.null_space == NullSpace::constants) {
    // Range of a symmetric singular A is orthogonal to its null space (constants).
    double sum = 0.0;
    double scale = 0.0;
    for (double v : b) {
      sum += v;
      scale += std::abs(v);
    }
    if (std::abs(sum) > 1e-9 * std::max(scale, std::numeric_limits<double>::min())) {
      throw CompatibilityError("right-hand side not orthogonal to constants", sum);
    }
    const double mean = sum / n;
    for (double& v : b) v -= mean;
  }

  SolveResult result;
  auto& x = result.x;
  auto& stats = result.stats;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    stats.residual_history.push_back(0.0);
    return result;
  }

  x = guess.empty() ? std::vector<double>(n, 0.0) : std::vector<double>(guess.begin(), guess.end());
  const auto minv = inverse_diagonal(a, cfg.jacobi);
  std::vector<double> r(n), z(n), az(n), p(n), ap(n), q(n);
  a.multiply(x, r);
  for (int i = 0; i < n; ++i) {
    r[i] = b[i] - r[i];
    z[i] = minv[i] * r[i];
  }
  a.multiply(z, az);
  p = z;
  ap = az;
  double zaz = dot(z, az);
  double rnorm = norm2(r);
  stats.residual_history.push_back(rnorm);

  const int limit = cfg.iteration_limit(n);
  const double target = cfg.rel_tol * bnorm;
  int it = 0;
  while (rnorm > target) {
    if (it >= limit) {
      throw SolverError("conjugate residual did not converge", it, rnorm / bnorm);
    }
    ++it;
    for (int i = 0; i < n; ++i) q[i] = minv[i] * ap[i];
    const double denom = dot(ap, q);
    if (!(denom > 0.0)) throw SolverError("conjugate residual breakdown", it, rnorm / bnorm);
    // Exact line minimiser of ‖r - α A p‖ in the M^{-1} norm.
    const double alpha = dot(z, ap) / denom;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      z[i] -= alpha * q[i];
    }
    rnorm = norm2(r);
    stats.residual_history.push_back(rnorm);
    if (rnorm <= target) break;
    a.multiply(z, az);
    const double zaz_new = dot(z, az);
    if (zaz == 0.0) throw SolverError("conjugate residual breakdown", it, rnorm / bnorm);
    const double beta = zaz_new / zaz;
    zaz = zaz_new;
    for (int i = 0; i < n; ++i) {
      p[i] = z[i] + beta * p[i];
      ap[i] = az[i] + beta * ap[i];
    }
  }
  stats.iterations = it;
  stats.relative_residual = rnorm / bnorm;
  if (cfg.null_space == NullSpace::constants) shift_to_weighted_mean_zero(x, cfg.weights);
  return result;
}

SolveResult solve_nonsym(const SparseMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                         std::span<const double> guess) {
  cfg.validate();
  const int n = a.size();
  if (static_cast<int>(b.size()) != n) throw ValidationError("solve_nonsym: rhs size mismatch");
  SolveResult result;
  auto& x = result.x;
  auto& stats = result.stats;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    stats.residual_history.push_back(0.0);
    return result;
  }
  x = guess.empty() ? std::vector<double>(n, 0.0) : std::vector<double>(guess.begin(), guess.end());
  const auto minv = inverse_diagonal(a, cfg.jacobi);

  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
  a.multiply(x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  rhat = r;
  double rnorm = norm2(r);
  stats.residual_history.push_back(rnorm);
  const double target = cfg.rel_tol * bnorm;
  const int limit = cfg.iteration_limit(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  int it = 0;
  while (rnorm > target) {
    if (it >= limit) throw SolverError("BiCGSTAB did not converge", it, rnorm / bnorm);
    ++it;
    const double rho_new = dot(rhat, r);
    if (rho_new == 0.0 || omega == 0.0) throw SolverError("BiCGSTAB breakdown", it, rnorm / bnorm);
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int i = 0; i < n; ++i) {
      p[i] = r[i] + beta * (p[i] - omega * v[i]);
      phat[i] = minv[i] * p[i];
    }
    a.multiply(phat, v);
    const double rv = dot(rhat, v);
    if (rv == 0.0) throw SolverError("BiCGSTAB breakdown", it, rnorm / bnorm);
    alpha = rho / rv;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    const double snorm = norm2(s);
    if (snorm <= target) {
      for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
      rnorm = snorm;
      stats.residual_history.push_back(rnorm);
      break;
    }
    for (int i = 0; i < n; ++i) shat[i] = minv[i] * s[i];
    a.multiply(shat, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    rnorm = norm2(r);
    stats.residual_history.push_back(rnorm);
    if (!std::isfinite(rnorm)) throw SolverError("BiCGSTAB diverged", it, rnorm);
  }
  stats.iterations = it;
  stats.relative_residual = rnorm / bnorm;
  return result;
}

std::vector<double> solve_banded(const SparseMatrix& a, std::span<const double> b) {
  const int n = a.size();
  if (n > 4096) throw ValidationError("banded direct solve limited to n <= 4096");
  int bw = 0;
  const auto off = a.row_offsets();
  const auto cols = a.columns();
  const auto vals = a.values();
  for (int row = 0; row < n; ++row) {
    for (int k = off[row]; k < off[row + 1]; ++k) bw = std::max(bw, std::abs(cols[k] - row));
  }
  const int width = 2 * bw + 1;
  // band(i, j) stored at i * width + (j - i + bw)
  std::vector<double> band(static_cast<std::size_t>(n) * width, 0.0);
  for (int row = 0; row < n; ++row) {
    for (int k = off[row]; k < off[row + 1]; ++k) band[row * width + cols[k] - row + bw] = vals[k];
  }
  std::vector<double> x(b.begin(), b.end());
  for (int k = 0; k < n; ++k) {
    const double pivot = band[k * width + bw];
    if (pivot == 0.0) throw SolverError("banded LU: zero pivot", k, 0.0);
    const int last = std::min(n - 1, k + bw);
    for (int i = k + 1; i <= last; ++i) {
      double& lik = band[i * width + k - i + bw];
      if (lik == 0.0) continue;
      lik /= pivot;
      for (int j = k + 1; j <= last; ++j) band[i * width + j - i + bw] -= lik * band[k * width + j - k + bw];
      x[i] -= lik * x[k];
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    double s = x[k];
    const int last = std::min(n - 1, k + bw);
    for (int j = k + 1; j <= last; ++j) s -= band[k * width + j - k + bw] * x[j];
    x[k] = s / band[k * width + bw];
  }
  return x;
}

}  // namespace pnp
