#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pnp {

enum class Axis { x1 = 0, x2 = 1 };

/// Shape of the solid inclusion Y^s inside the unit periodicity cell.
struct InclusionSpec {
  enum class Kind { none, centered_square, centered_disk, custom };

  Kind kind = Kind::none;
  /// Side length for squares, radius for disks; unused otherwise.
  double size = 0.0;

  static InclusionSpec none() { return {}; }
  static InclusionSpec square(double side) { return {Kind::centered_square, side}; }
  static InclusionSpec disk(double radius) { return {Kind::centered_disk, radius}; }
  static InclusionSpec custom() { return {Kind::custom, 0.0}; }

  /// Throws ValidationError unless the closed inclusion lies strictly inside Y.
  void validate() const;
  std::string describe() const;
};

/// Point on the inclusion boundary Γ carrying a quadrature length.
struct BoundarySegment {
  double y1;
  double y2;
  double length;
};

/// Cell-centered discretization of Y = (0,1)^2 with a fluid mask.
/// Cell (i, j) has center ((i+1/2)h, (j+1/2)h); storage is row-major from y2 = 0.
class CellGrid {
 public:
  /// Validates that the fluid phase is non-empty and connected (with periodic wrap).
  CellGrid(int resolution, std::vector<std::uint8_t> fluid_mask, InclusionSpec inclusion);

  int resolution() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / n_; }
  const InclusionSpec& inclusion() const noexcept { return inclusion_; }
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  int index(int i, int j) const noexcept { return wrap(j) * n_ + wrap(i); }
  bool is_fluid(int i, int j) const noexcept { return mask_[index(i, j)] != 0; }
  int fluid_count() const noexcept { return fluid_count_; }

 private:
  int wrap(int i) const noexcept { return ((i % n_) + n_) % n_; }

  int n_;
  std::vector<std::uint8_t> mask_;
  InclusionSpec inclusion_;
  int fluid_count_ = 0;
};

CellGrid build_unit_cell(int resolution, const InclusionSpec& inclusion);

/// Mask file: first line N, then N lines of N characters 'F'/'S', row-major from y=0.
CellGrid read_mask(std::istream& in);
CellGrid read_mask_file(const std::string& path);
void write_mask(std::ostream& out, const CellGrid& grid);

double fluid_volume_fraction(const CellGrid& grid);

/// Quadrature of Γ: staircase faces for squares and custom masks, 256 points on
/// the exact circle for disks.
std::vector<BoundarySegment> inclusion_boundary_segments(const CellGrid& grid);
double inclusion_boundary_measure(const CellGrid& grid);

/// Interior face between two fluid cells; `left` has the smaller coordinate
/// along `axis`. Indices are compact fluid-cell indices.
struct Face {
  int left;
  int right;
  Axis axis;
};

enum class BoundaryKind { outer, inclusion };

/// Face of a fluid cell lying on ∂Ω (outer) or on a solid grain (inclusion).
struct BoundaryFace {
  int cell;
  Axis axis;
  int normal_sign;  // outward normal is normal_sign * e_axis
  BoundaryKind kind;
  double x1;        // face midpoint
  double x2;
};

/// Cell-centered grid of Ω = (0,1)^2 restricted to a fluid mask (no wrap).
class FluidGrid {
 public:
  FluidGrid(int resolution, std::vector<std::uint8_t> fluid_mask);

  int resolution() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double cell_volume() const noexcept { return h_ * h_; }
  int fluid_count() const noexcept { return static_cast<int>(cells_.size()); }
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  /// Grid cell (row-major) of compact fluid index k.
  int grid_cell(int k) const noexcept { return cells_[k]; }
  /// Compact index of grid cell (i, j), or -1 if solid.
  int fluid_index(int i, int j) const noexcept { return index_[j * n_ + i]; }
  double center_x1(int k) const noexcept { return ((cells_[k] % n_) + 0.5) * h_; }
  double center_x2(int k) const noexcept { return ((cells_[k] / n_) + 0.5) * h_; }

  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<BoundaryFace>& boundary_faces() const noexcept { return boundary_; }
  std::vector<double> volumes() const;

  /// Samples f at fluid-cell centers.
  std::vector<double> sample(const std::function<double(double, double)>& f) const;

 private:
  int n_;
  double h_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> cells_;
  std::vector<int> index_;
  std::vector<Face> faces_;
  std::vector<BoundaryFace> boundary_;
};

/// Perforated domain Ω_ε: the unit square tiled by M x M scaled copies of a cell mask.
struct PerforatedGrid {
  double epsilon;
  int periods;           // M = 1/ε
  int cells_per_period;  // n_c
  InclusionSpec inclusion;
  FluidGrid grid;
};

/// ε must equal 1/M for an integer M ≥ 2; M * n_c ≤ 4096.
PerforatedGrid build_perforated_grid(double epsilon, const InclusionSpec& inclusion,
                                     int cells_per_period);
/// Tiles an existing cell mask (e.g. one read from a mask file).
PerforatedGrid build_perforated_grid(double epsilon, const CellGrid& cell);

/// Unperforated unit square with n x n cells (the macroscopic domain).
FluidGrid build_full_grid(int resolution);

}  // namespace pnp

namespace pnp {

/// Bilinear interpolation of a cell-centered field on a full (unperforated)
/// grid; points within half a cell of ∂Ω use the nearest interior values.
double interpolate_bilinear(const FluidGrid& full, std::span<const double> field, double x1, double x2);

/// Samples a full-grid field at every fluid-cell center of `target`.
std::vector<double> resample_bilinear(const FluidGrid& full, std::span<const double> field, const FluidGrid& target);

}  // namespace pnp
