#include "pnp/geometry.hpp"

#include "pnp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

namespace pnp {

void InclusionSpec::validate() const {
  switch (kind) {
    case Kind::none:
    case Kind::custom:
      return;
    case Kind::centered_square:
      if (!(size > 0.0 && size < 1.0)) {
        throw ValidationError("centered_square side must lie in (0,1), got " + std::to_string(size));
      }
      return;
    case Kind::centered_disk:
      if (!(size > 0.0 && size < 0.5)) {
        throw ValidationError("centered_disk radius must lie in (0,0.5), got " + std::to_string(size));
      }
      return;
  }
}

std::string InclusionSpec::describe() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::centered_square: return "centered_square(" + std::to_string(size) + ")";
    case Kind::centered_disk: return "centered_disk(" + std::to_string(size) + ")";
    case Kind::custom: return "custom";
  }
  return "?";
}

namespace {

// Breadth-first flood fill over fluid cells; returns the number reached.
int flood_fill(int n, std::span<const std::uint8_t> mask, bool periodic) {
  int start = -1;
  for (int c = 0; c < n * n; ++c) {
    if (mask[c]) {
      start = c;
      break;
    }
  }
  if (start < 0) return 0;
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<int> queue{start};
  seen[start] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int c = queue[head];
    const int i = c % n;
    const int j = c / n;
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      int ii = i + di[d];
      int jj = j + dj[d];
      if (periodic) {
        ii = (ii + n) % n;
        jj = (jj + n) % n;
      } else if (ii < 0 || jj < 0 || ii >= n || jj >= n) {
        continue;
      }
      const int nc = jj * n + ii;
      if (mask[nc] && !seen[nc]) {
        seen[nc] = 1;
        queue.push_back(nc);
      }
    }
  }
  return static_cast<int>(queue.size());
}

// Distance of the center of cell i from 1/2, computed symmetrically in i <-> n-1-i.
double center_offset(int i, int n) { return std::abs(2 * i + 1 - n) / (2.0 * n); }

}  // namespace

CellGrid::CellGrid(int resolution, std::vector<std::uint8_t> fluid_mask, InclusionSpec inclusion)
    : n_(resolution), mask_(std::move(fluid_mask)), inclusion_(inclusion) {
  if (n_ < 1 || mask_.size() != static_cast<std::size_t>(n_) * n_) {
    throw ValidationError("cell mask size does not match resolution");
  }
  for (auto m : mask_) fluid_count_ += m ? 1 : 0;
  if (fluid_count_ == 0) throw GeometryError("unit cell has no fluid cells");
  if (flood_fill(n_, mask_, true) != fluid_count_) {
    throw GeometryError("fluid part of the unit cell is not connected");
  }
}

CellGrid build_unit_cell(int resolution, const InclusionSpec& inclusion) {
  if (resolution < 8 || resolution % 2 != 0) {
    throw ValidationError("cell resolution must be even and >= 8, got " + std::to_string(resolution));
  }
  if (inclusion.kind == InclusionSpec::Kind::custom) {
    throw ValidationError("custom inclusions are read from a mask file");
  }
  inclusion.validate();
  const int n = resolution;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double dx = center_offset(i, n);
      const double dy = center_offset(j, n);
      bool solid = false;
      switch (inclusion.kind) {
        case InclusionSpec::Kind::centered_square:
          solid = dx < 0.5 * inclusion.size && dy < 0.5 * inclusion.size;
          break;
        case InclusionSpec::Kind::centered_disk:
          solid = dx * dx + dy * dy < inclusion.size * inclusion.size;
          break;
        default:
          break;
      }
      if (solid) mask[j * n + i] = 0;
    }
  }
  return CellGrid(n, std::move(mask), inclusion);
}

CellGrid read_mask(std::istream& in) {
  int n = 0;
  if (!(in >> n) || n < 1) throw ValidationError("mask file: expected resolution N on line 1");
  std::string line;
  std::getline(in, line);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
  for (int j = 0; j < n; ++j) {
    if (!std::getline(in, line)) {
      throw ValidationError("mask file: expected " + std::to_string(n) + " rows, got " + std::to_string(j));
    }
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (static_cast<int>(line.size()) != n) {
      throw ValidationError("mask file: row " + std::to_string(j) + " has " +
                            std::to_string(line.size()) + " characters, expected " + std::to_string(n));
    }
    for (int i = 0; i < n; ++i) {
      if (line[i] == 'F') {
        mask[j * n + i] = 1;
      } else if (line[i] != 'S') {
        throw ValidationError("mask file: invalid character '" + std::string(1, line[i]) + "' in row " +
                              std::to_string(j));
      }
    }
  }
  // A closed inclusion must not touch ∂Y, so the outer ring is fluid.
  for (int k = 0; k < n; ++k) {
    if (!mask[k] || !mask[(n - 1) * n + k] || !mask[k * n] || !mask[k * n + n - 1]) {
      throw ValidationError("mask file: solid cells touch the cell boundary");
    }
  }
  return CellGrid(n, std::move(mask), InclusionSpec::custom());
}

CellGrid read_mask_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mask file " + path);
  return read_mask(in);
}

void write_mask(std::ostream& out, const CellGrid& grid) {
  const int n = grid.resolution();
  out << n << '\n';
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) out << (grid.is_fluid(i, j) ? 'F' : 'S');
    out << '\n';
  }
}

double fluid_volume_fraction(const CellGrid& grid) {
  const double h = grid.spacing();
  return grid.fluid_count() * h * h;
}

std::vector<BoundarySegment> inclusion_boundary_segments(const CellGrid& grid) {
  std::vector<BoundarySegment> segments;
  const auto& inc = grid.inclusion();
  if (inc.kind == InclusionSpec::Kind::none) return segments;
  if (inc.kind == InclusionSpec::Kind::centered_disk) {
    constexpr int nodes = 256;
    const double r = inc.size;
    const double len = 2.0 * std::numbers::pi * r / nodes;
    for (int q = 0; q < nodes; ++q) {
      const double theta = 2.0 * std::numbers::pi * (q + 0.5) / nodes;
      segments.push_back({0.5 + r * std::cos(theta), 0.5 + r * std::sin(theta), len});
    }
    return segments;
  }
  // Staircase: every fluid/solid face, midpoint quadrature.
  const int n = grid.resolution();
  const double h = grid.spacing();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!grid.is_fluid(i, j)) continue;
      if (!grid.is_fluid(i + 1, j)) segments.push_back({(i + 1) * h, (j + 0.5) * h, h});
      if (!grid.is_fluid(i - 1, j)) segments.push_back({i * h, (j + 0.5) * h, h});
      if (!grid.is_fluid(i, j + 1)) segments.push_back({(i + 0.5) * h, (j + 1) * h, h});
      if (!grid.is_fluid(i, j - 1)) segments.push_back({(i + 0.5) * h, j * h, h});
    }
  }
  return segments;
}

double inclusion_boundary_measure(const CellGrid& grid) {
  double total = 0.0;
  for (const auto& s : inclusion_boundary_segments(grid)) total += s.length;
  return total;
}

FluidGrid::FluidGrid(int resolution, std::vector<std::uint8_t> fluid_mask)
    : n_(resolution), h_(1.0 / resolution), mask_(std::move(fluid_mask)) {
  if (n_ < 1 || mask_.size() != static_cast<std::size_t>(n_) * n_) {
    throw ValidationError("fluid mask size does not match resolution");
  }
  index_.assign(mask_.size(), -1);
  for (int c = 0; c < n_ * n_; ++c) {
    if (mask_[c]) {
      index_[c] = static_cast<int>(cells_.size());
      cells_.push_back(c);
    }
  }
  if (cells_.empty()) throw GeometryError("domain has no fluid cells");
  if (flood_fill(n_, mask_, false) != fluid_count()) {
    throw GeometryError("fluid domain is not connected");
  }
  for (int k = 0; k < fluid_count(); ++k) {
    const int i = cells_[k] % n_;
    const int j = cells_[k] / n_;
    const double xc = (i + 0.5) * h_;
    const double yc = (j + 0.5) * h_;
    // East and north neighbours own the interior faces; all four sides may be boundary.
    auto side = [&](int ii, int jj, Axis axis, int sign, double fx, double fy) {
      if (ii < 0 || jj < 0 || ii >= n_ || jj >= n_) {
        boundary_.push_back({k, axis, sign, BoundaryKind::outer, fx, fy});
        return;
      }
      const int other = index_[jj * n_ + ii];
      if (other < 0) {
        boundary_.push_back({k, axis, sign, BoundaryKind::inclusion, fx, fy});
      } else if (sign > 0) {
        faces_.push_back({k, other, axis});
      }
    };
    side(i - 1, j, Axis::x1, -1, i * h_, yc);
    side(i + 1, j, Axis::x1, +1, (i + 1) * h_, yc);
    side(i, j - 1, Axis::x2, -1, xc, j * h_);
    side(i, j + 1, Axis::x2, +1, xc, (j + 1) * h_);
  }
}

std::vector<double> FluidGrid::volumes() const {
  return std::vector<double>(cells_.size(), cell_volume());
}

std::vector<double> FluidGrid::sample(const std::function<double(double, double)>& f) const {
  std::vector<double> out(cells_.size());
  for (int k = 0; k < fluid_count(); ++k) out[k] = f(center_x1(k), center_x2(k));
  return out;
}

PerforatedGrid build_perforated_grid(double epsilon, const CellGrid& cell) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const int periods = static_cast<int>(std::lround(1.0 / epsilon));
  if (periods < 2 || std::abs(1.0 / periods - epsilon) > 1e-12) {
    throw ValidationError("epsilon must equal 1/M for an integer M >= 2, got " + std::to_string(epsilon));
  }
  const int nc = cell.resolution();
  if (static_cast<long>(periods) * nc > 4096) {
    throw ValidationError("perforated grid resolution " + std::to_string(periods * nc) + " exceeds 4096");
  }
  const int n = periods * nc;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) mask[j * n + i] = cell.is_fluid(i % nc, j % nc) ? 1 : 0;
  }
  return PerforatedGrid{1.0 / periods, periods, nc, cell.inclusion(), FluidGrid(n, std::move(mask))};
}

PerforatedGrid build_perforated_grid(double epsilon, const InclusionSpec& inclusion, int cells_per_period) {
  return build_perforated_grid(epsilon, build_unit_cell(cells_per_period, inclusion));
}

FluidGrid build_full_grid(int resolution) {
  if (resolution < 2) throw ValidationError("grid resolution must be >= 2");
  return FluidGrid(resolution, std::vector<std::uint8_t>(static_cast<std::size_t>(resolution) * resolution, 1));
}

}  // namespace pnp

namespace pnp {

double interpolate_bilinear(const FluidGrid& full, std::span<const double> field, double x1, double x2) {
  const int n = full.resolution();
  if (full.fluid_count() != n * n) throw ValidationError("bilinear interpolation needs an unperforated grid");
  const double s = std::clamp(x1 * n - 0.5, 0.0, n - 1.0);
  const double t = std::clamp(x2 * n - 0.5, 0.0, n - 1.0);
  const int i0 = std::min(static_cast<int>(s), n - 2 < 0 ? 0 : n - 2);
  const int j0 = std::min(static_cast<int>(t), n - 2 < 0 ? 0 : n - 2);
  const int i1 = std::min(i0 + 1, n - 1);
  const int j1 = std::min(j0 + 1, n - 1);
  const double fs = s - i0;
  const double ft = t - j0;
  const double v00 = field[j0 * n + i0];
  const double v10 = field[j0 * n + i1];
  const double v01 = field[j1 * n + i0];
  const double v11 = field[j1 * n + i1];
  return (1 - fs) * (1 - ft) * v00 + fs * (1 - ft) * v10 + (1 - fs) * ft * v01 + fs * ft * v11;
}

std::vector<double> resample_bilinear(const FluidGrid& full, std::span<const double> field, const FluidGrid& target) {
  std::vector<double> out(target.fluid_count());
  for (int k = 0; k < target.fluid_count(); ++k) {
    out[k] = interpolate_bilinear(full, field, target.center_x1(k), target.center_x2(k));
  }
  return out;
}

}  // namespace pnp
