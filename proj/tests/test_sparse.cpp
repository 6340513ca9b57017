#include "pnp/errors.hpp"
#include "pnp/sparse.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pnp;

namespace {

// Dense Gaussian elimination with partial pivoting: the reference solver.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

SparseMatrix laplacian_2d(int n, double shift) {
  std::vector<SparseMatrix::Triplet> t;
  auto id = [n](int i, int j) { return j * n + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double d = shift;
      const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
      for (auto& q : nb) {
        if (q[0] < 0 || q[0] >= n || q[1] < 0 || q[1] >= n) continue;
        t.push_back({id(i, j), id(q[0], q[1]), -1.0});
        d += 1.0;
      }
      t.push_back({id(i, j), id(i, j), d});
    }
  return SparseMatrix::from_triplets(n * n, t);
}

}  // namespace

TEST_CASE("triplet assembly sums duplicates and drops zeros") {
  const auto a = SparseMatrix::from_triplets(3, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 2, 5.0}, {2, 1, 0.0}, {1, 0, -1.0}});
  CHECK(a.coeff(0, 0) == 3.0);
  CHECK(a.coeff(1, 2) == 5.0);
  CHECK(a.coeff(2, 1) == 0.0);
  CHECK(a.nonzeros() == 3);
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto y = a * x;
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 14.0);
  CHECK(y[2] == 0.0);
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, {{2, 0, 1.0}}), ValidationError);
}

TEST_CASE("SPD solver matches dense elimination") {
  const int n = 12;
  const auto a = laplacian_2d(n, 0.1);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> b(n * n);
  for (auto& v : b) v = u(rng);
  std::vector<std::vector<double>> dense(n * n, std::vector<double>(n * n, 0.0));
  for (int r = 0; r < n * n; ++r)
    for (int c = 0; c < n * n; ++c) dense[r][c] = a.coeff(r, c);
  const auto ref = dense_solve(dense, b);
  for (bool jacobi : {false, true}) {
    SolverConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.jacobi = jacobi;
    const auto res = solve_spd(a, b, cfg);
    CHECK(res.stats.relative_residual <= 1e-12);
    for (int k = 0; k < n * n; ++k) CHECK(res.x[k] == doctest::Approx(ref[k]).epsilon(1e-9));
  }
}

TEST_CASE("SPD residual history is non-increasing") {
  const auto a = laplacian_2d(40, 0.0);
  std::vector<double> b(1600);
  for (int k = 0; k < 1600; ++k) b[k] = std::sin(0.37 * k) + (k % 7 == 0 ? 1.0 : 0.0);
  double mean = 0.0;
  for (double v : b) mean += v / 1600;
  for (auto& v : b) v -= mean;
  for (bool jacobi : {false, true}) {
    SolverConfig cfg;
    cfg.null_space = NullSpace::constants;
    cfg.jacobi = jacobi;
    const auto res = solve_spd(a, b, cfg);
    const auto& h = res.stats.residual_history;
    REQUIRE(h.size() == static_cast<std::size_t>(res.stats.iterations) + 1);
    for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1] * (1 + 1e-12));
  }
}

TEST_CASE("singular periodic 1D Laplacian: Fourier mode oracle") {
  // -u'' = cos(2 pi m x) on a periodic grid; the discrete solution is the same
  // mode scaled by 1 / (4 sin^2(pi m / n)) in units of h^2.
  const int n = 64, m = 3;
  std::vector<SparseMatrix::Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    t.push_back({i, (i + 1) % n, -1.0});
    t.push_back({i, (i + n - 1) % n, -1.0});
  }
  const auto a = SparseMatrix::from_triplets(n, t);
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = std::cos(2 * M_PI * m * (i + 0.5) / n);
  SolverConfig cfg;
  cfg.null_space = NullSpace::constants;
  cfg.rel_tol = 1e-13;
  const auto res = solve_spd(a, b, cfg);
  const double lambda = 4 * std::pow(std::sin(M_PI * m / n), 2);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    CHECK(res.x[i] == doctest::Approx(b[i] / lambda).epsilon(1e-10).scale(1.0));
    mean += res.x[i];
  }
  CHECK(std::abs(mean) < 1e-10);

  SUBCASE("incompatible right-hand side is rejected") {
    std::vector<double> bad = b;
    bad[0] += 1.0;
    CHECK_THROWS_AS(solve_spd(a, bad, cfg), CompatibilityError);
  }
}

TEST_CASE("zero right-hand side returns zero without iterating") {
  const auto a = laplacian_2d(5, 1.0);
  const auto res = solve_spd(a, std::vector<double>(25, 0.0), SolverConfig{});
  CHECK(res.stats.iterations == 0);
  for (double v : res.x) CHECK(v == 0.0);
}

TEST_CASE("nonsymmetric solvers agree with dense elimination") {
  // Convection-diffusion-like M-matrix.
  const int n = 200;
  std::vector<SparseMatrix::Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 3.0 + 0.01 * i});
    if (i > 0) t.push_back({i, i - 1, -1.7});
    if (i + 1 < n) t.push_back({i, i + 1, -0.3});
    if (i + 20 < n) t.push_back({i, i + 20, -0.5});
  }
  const auto a = SparseMatrix::from_triplets(n, t);
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = std::cos(0.1 * i);
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  for (const auto& e : t) dense[e.row][e.col] += e.value;
  const auto ref = dense_solve(dense, b);
  SolverConfig cfg;
  cfg.rel_tol = 1e-13;
  const auto it = solve_nonsym(a, b, cfg);
  const auto lu = solve_banded(a, b);
  for (int i = 0; i < n; ++i) {
    CHECK(it.x[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    CHECK(lu[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("iteration limit raises SolverError") {
  const auto a = laplacian_2d(30, 0.0);
  std::vector<double> b(900, 0.0);
  b[0] = 1.0;
  b[899] = -1.0;
  SolverConfig cfg;
  cfg.null_space = NullSpace::constants;
  cfg.max_iter = 3;
  CHECK_THROWS_AS(solve_spd(a, b, cfg), SolverError);
}

TEST_CASE("solver configuration is validated") {
  SolverConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
