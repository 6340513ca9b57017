#include "pnp/homogenization.hpp"

#include "pnp/errors.hpp"

#include <cmath>

namespace pnp {

MacroModel build_macro_model(const CellGrid& cell, const HomTensor& ht, const BoundaryCharge& bc,
                             std::vector<SpeciesParams> species) {
  MacroModel m;
  m.tensor = ht;
  m.species = std::move(species);
  m.zero_boundary_charge = !bc.xi1 && !bc.xi2;
  const double fraction = ht.fluid_fraction;
  if (bc.xi1 && cell.inclusion().kind != InclusionSpec::Kind::none) {
    auto segs = inclusion_boundary_segments(cell);
    auto xi1 = bc.xi1;
    m.charge_offset = [segs = std::move(segs), xi1, fraction](double x1, double x2) {
      double total = 0.0;
      for (const auto& s : segs) total += xi1(x1, x2, s.y1, s.y2) * s.length;
      return total / fraction;
    };
  } else {
    m.charge_offset = [](double, double) { return 0.0; };
  }
  auto xi2 = bc.xi2;
  m.boundary_flux = [xi2, fraction](double x1, double x2) { return xi2 ? xi2(x1, x2) / fraction : 0.0; };
  return m;
}

PnpModel to_pnp_model(const MacroModel& macro, int resolution, const AppPnpParams& app, const StepControl& control) {
  auto grid = std::make_shared<const FluidGrid>(build_full_grid(resolution));
  PnpModel m;
  m.grid = grid;
  m.tensor = DiffusionTensor::from_matrix(macro.tensor.a);
  m.species = macro.species;
  m.fixed_charge = grid->sample(macro.charge_offset);
  m.boundary_flux.reserve(grid->boundary_faces().size());
  for (const auto& f : grid->boundary_faces()) m.boundary_flux.push_back(macro.boundary_flux(f.x1, f.x2));
  m.app = app;
  m.control = control;
  m.zero_boundary_charge = macro.zero_boundary_charge;
  return m;
}

std::array<std::vector<double>, 2> macro_gradient(const FluidGrid& full, std::span<const double> u) {
  const int n = full.resolution();
  if (full.fluid_count() != n * n) throw ValidationError("macro gradient needs an unperforated grid");
  if (n < 3) throw ValidationError("macro gradient needs at least 3 cells per direction");
  const double h = full.spacing();
  auto at = [&](int i, int j) { return u[static_cast<std::size_t>(j) * n + i]; };
  auto diff = [&](int m, auto&& val) {
    if (m == 0) return (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
    if (m == n - 1) return (3.0 * val(n - 1) - 4.0 * val(n - 2) + val(n - 3)) / (2.0 * h);
    return (val(m + 1) - val(m - 1)) / (2.0 * h);
  };
  std::array<std::vector<double>, 2> g{std::vector<double>(u.size()), std::vector<double>(u.size())};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * n + i;
      g[0][c] = diff(i, [&](int m) { return at(m, j); });
      g[1][c] = diff(j, [&](int m) { return at(i, m); });
    }
  }
  return g;
}

std::array<std::vector<double>, 2> fine_gradient(const FluidGrid& grid, std::span<const double> u,
                                                 std::span<const double> boundary_flux) {
  const auto m = static_cast<std::size_t>(grid.fluid_count());
  if (u.size() != m) throw ValidationError("field size does not match the grid");
  const auto& bfaces = grid.boundary_faces();
  if (!boundary_flux.empty() && boundary_flux.size() != bfaces.size())
    throw ValidationError("boundary flux size does not match the boundary face count");
  const double h = grid.spacing();
  // sum[a][k] accumulates the two one-sided quotients of cell k along axis a.
  std::array<std::vector<double>, 2> g{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (const auto& f : grid.faces()) {
    const double q = (u[static_cast<std::size_t>(f.right)] - u[static_cast<std::size_t>(f.left)]) / h;
    const int a = static_cast<int>(f.axis);
    g[a][static_cast<std::size_t>(f.left)] += 0.5 * q;
    g[a][static_cast<std::size_t>(f.right)] += 0.5 * q;
  }
  for (std::size_t b = 0; b < bfaces.size(); ++b) {
    const double flux = boundary_flux.empty() ? 0.0 : boundary_flux[b];
    g[static_cast<int>(bfaces[b].axis)][static_cast<std::size_t>(bfaces[b].cell)] += 0.5 * flux * bfaces[b].normal_sign;
  }
  return g;
}

namespace {

double frac(double v) { return v - std::floor(v); }

/// Value of a cell-grid field at y ∈ [0,1)^2, ignoring solid cells.
class CellSampler {
 public:
  CellSampler(const CellGrid& cell, CellSampling mode) : cell_(cell), mode_(mode) {
    // Nearest fluid cell for every grid cell (itself when fluid).
    const int n = cell.resolution();
    nearest_.assign(static_cast<std::size_t>(n) * n, -1);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (cell.is_fluid(i, j)) {
          nearest_[cell.index(i, j)] = cell.index(i, j);
          continue;
        }
        double best = 1e300;
        for (int r = 1; r <= n && nearest_[cell.index(i, j)] < 0; ++r) {
          for (int dj = -r; dj <= r; ++dj) {
            for (int di = -r; di <= r; ++di) {
              if (std::max(std::abs(di), std::abs(dj)) != r || !cell.is_fluid(i + di, j + dj)) continue;
              const double d = static_cast<double>(di) * di + static_cast<double>(dj) * dj;
              if (d < best) {
                best = d;
                nearest_[cell.index(i, j)] = cell.index(i + di, j + dj);
              }
            }
          }
        }
      }
    }
  }

  double operator()(std::span<const double> field, double y1, double y2) const {
    const int n = cell_.resolution();
    if (mode_ == CellSampling::nearest) {
      const int i = std::min(n - 1, static_cast<int>(y1 * n));
      const int j = std::min(n - 1, static_cast<int>(y2 * n));
      return field[static_cast<std::size_t>(nearest_[cell_.index(i, j)])];
    }
    const double s1 = y1 * n - 0.5, s2 = y2 * n - 0.5;
    const int i0 = static_cast<int>(std::floor(s1)), j0 = static_cast<int>(std::floor(s2));
    const double t1 = s1 - i0, t2 = s2 - j0;
    double num = 0.0, den = 0.0;
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        if (!cell_.is_fluid(i0 + di, j0 + dj)) continue;
        const double wgt = (di ? t1 : 1 - t1) * (dj ? t2 : 1 - t2);
        num += wgt * field[static_cast<std::size_t>(cell_.index(i0 + di, j0 + dj))];
        den += wgt;
      }
    }
    if (den <= 1e-14) {
      const int i = std::min(n - 1, static_cast<int>(y1 * n));
      const int j = std::min(n - 1, static_cast<int>(y2 * n));
      return field[static_cast<std::size_t>(nearest_[cell_.index(i, j)])];
    }
    return num / den;
  }

 private:
  const CellGrid& cell_;
  CellSampling mode_;
  std::vector<int> nearest_;
};

}  // namespace

CorrectorField reconstruct_corrector(const FluidGrid& macro, std::span<const double> u0, const CellGrid& cell,
                                     const std::array<CellSolution, 2>& sols, const PerforatedGrid& fine,
                                     double epsilon, CellSampling sampling) {
  if (std::abs(epsilon - fine.epsilon) > 1e-12 * std::max(1.0, epsilon))
    throw ValidationError("corrector epsilon " + std::to_string(epsilon) + " does not match the grid epsilon " +
                          std::to_string(fine.epsilon));
  if (u0.size() != static_cast<std::size_t>(macro.fluid_count()))
    throw ValidationError("macro field size does not match the macro grid");
  const auto grad = macro_gradient(macro, u0);
  std::array<const CellSolution*, 2> w{};
  for (const auto& s : sols) w[static_cast<int>(s.direction)] = &s;
  if (!w[0] || !w[1]) throw ValidationError("corrector needs both cell solutions");
  const std::array<CellGradient, 2> wg{cell_gradient(cell, *w[0]), cell_gradient(cell, *w[1])};
  const CellSampler sample(cell, sampling);

  const FluidGrid& g = fine.grid;
  const auto m = static_cast<std::size_t>(g.fluid_count());
  CorrectorField out;
  out.value.resize(m);
  for (auto* v : {&out.gradient[0], &out.gradient[1], &out.plain_gradient[0], &out.plain_gradient[1]}) v->resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double x1 = g.center_x1(static_cast<int>(k)), x2 = g.center_x2(static_cast<int>(k));
    const double y1 = frac(x1 / epsilon), y2 = frac(x2 / epsilon);
    const double u = interpolate_bilinear(macro, u0, x1, x2);
    const double d1 = interpolate_bilinear(macro, grad[0], x1, x2);
    const double d2 = interpolate_bilinear(macro, grad[1], x1, x2);
    out.value[k] = u + epsilon * (d1 * sample(w[0]->w, y1, y2) + d2 * sample(w[1]->w, y1, y2));
    out.plain_gradient[0][k] = d1;
    out.plain_gradient[1][k] = d2;
    out.gradient[0][k] = d1 + d1 * sample(wg[0].g1, y1, y2) + d2 * sample(wg[1].g1, y1, y2);
    out.gradient[1][k] = d2 + d1 * sample(wg[0].g2, y1, y2) + d2 * sample(wg[1].g2, y1, y2);
  }
  return out;
}

double gradient_error(const FluidGrid& grid, const std::array<std::vector<double>, 2>& a,
                      const std::array<std::vector<double>, 2>& b) {
  double s = 0.0;
  for (int ax = 0; ax < 2; ++ax) {
    if (a[ax].size() != b[ax].size()) throw ValidationError("gradient fields differ in size");
    for (std::size_t k = 0; k < a[ax].size(); ++k) s += (a[ax][k] - b[ax][k]) * (a[ax][k] - b[ax][k]);
  }
  return std::sqrt(s * grid.cell_volume());
}

double two_scale_pairing(const FluidGrid& grid, std::span<const double> u, const TwoScaleTest& psi, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (u.size() != static_cast<std::size_t>(grid.fluid_count()))
    throw ValidationError("field size does not match the grid");
  double s = 0.0;
  for (int k = 0; k < grid.fluid_count(); ++k) {
    const double x1 = grid.center_x1(k), x2 = grid.center_x2(k);
    s += u[static_cast<std::size_t>(k)] * psi(x1, x2, frac(x1 / epsilon), frac(x2 / epsilon));
  }
  return s * grid.cell_volume();
}

double two_scale_cell_residual(const CellGrid& cell, const std::array<CellSolution, 2>& sols, const FluidGrid& macro,
                               std::span<const double> u0) {
  const int n = cell.resolution();
  const double h = cell.spacing();
  std::array<const CellSolution*, 2> w{};
  for (const auto& s : sols) w[static_cast<int>(s.direction)] = &s;
  if (!w[0] || !w[1]) throw ValidationError("cell residual needs both cell solutions");
  // Residual r_k = A w_k - b_k and load b_k per direction; both are linear in ∇c0.
  std::array<std::vector<double>, 2> r, b;
  for (int d = 0; d < 2; ++d) {
    r[d].assign(static_cast<std::size_t>(n) * n, 0.0);
    b[d].assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (!cell.is_fluid(i, j)) continue;
        const int c = cell.index(i, j);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int q = 0; q < 4; ++q) {
          if (!cell.is_fluid(i + di[q], j + dj[q])) continue;
          const int l = cell.index(i + di[q], j + dj[q]);
          r[d][c] += w[d]->w[c] - w[d]->w[l];
          b[d][c] += h * (d == 0 ? di[q] : dj[q]);
        }
        r[d][c] -= b[d][c];
      }
    }
  }
  const auto grad = macro_gradient(macro, u0);
  double worst = 0.0;
  for (std::size_t k = 0; k < grad[0].size(); ++k) {
    double rr = 0.0, bb = 0.0;
    for (std::size_t c = 0; c < r[0].size(); ++c) {
      const double rv = grad[0][k] * r[0][c] + grad[1][k] * r[1][c];
      const double bv = grad[0][k] * b[0][c] + grad[1][k] * b[1][c];
      rr += rv * rv;
      bb += bv * bv;
    }
    if (bb > 0.0) worst = std::max(worst, std::sqrt(rr / bb));
  }
  return worst;
}

}  // namespace pnp
