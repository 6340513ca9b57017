#pragma once

#include <span>
#include <vector>

namespace pnp {

/// Square matrix in compressed-row layout. Column indices are sorted and
/// unique within each row; explicit zeros are dropped at assembly.
class SparseMatrix {
 public:
  struct Triplet {
    int row;
    int col;
    double value;
  };

  SparseMatrix() = default;
  /// Duplicate entries are summed.
  static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets);

  int size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }
  std::span<const int> row_offsets() const noexcept { return offsets_; }
  std::span<const int> columns() const noexcept { return cols_; }
  std::span<const double> values() const noexcept { return values_; }

  double coeff(int row, int col) const;
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  std::vector<double> diagonal() const;

 private:
  int n_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

enum class NullSpace { none, constants };

struct SolverConfig {
  double rel_tol = 1e-10;
  /// 0 selects the default 20*sqrt(n) + 200.
  int max_iter = 0;
  NullSpace null_space = NullSpace::none;
  /// Cell volumes defining the weighted mean for the constants null space;
  /// empty means uniform weights.
  std::vector<double> weights;
  bool jacobi = false;

  int iteration_limit(int n) const;
  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  /// ‖r_k‖₂ for k = 0..iterations.
  std::vector<double> residual_history;
};

struct SolveResult {
  std::vector<double> x;
  SolveStats stats;
};

/// Conjugate-residual Krylov solver for symmetric positive (semi-)definite A.
/// With NullSpace::constants the right-hand side must sum to zero (relative
/// tolerance 1e-9) and the returned solution has weighted mean zero.
SolveResult solve_spd(const SparseMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                      std::span<const double> guess = {});

/// BiCGSTAB for nonsymmetric nonsingular A.
SolveResult solve_nonsym(const SparseMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                         std::span<const double> guess = {});

/// Direct banded LU without pivoting; intended for diagonally dominant
/// systems with n ≤ 4096 when the Krylov solvers fail.
std::vector<double> solve_banded(const SparseMatrix& a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace pnp
