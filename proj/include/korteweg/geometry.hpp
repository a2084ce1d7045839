#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "korteweg/grid.hpp"

namespace korteweg {

struct DiscGrain {
  std::array<double, 2> center{0.5, 0.5};
  double radius = 0.25;
};

struct SquareGrain {
  std::array<double, 2> center{0.5, 0.5};
  double half_side = 0.2;
};

struct EllipseGrain {
  std::array<double, 2> center{0.5, 0.5};
  double semi_x = 0.3;
  double semi_y = 0.2;
};

using GrainShape = std::variant<DiscGrain, SquareGrain, EllipseGrain>;

bool grain_contains(const GrainShape& shape, double x, double y);
double grain_area(const GrainShape& shape);
std::array<double, 2> grain_center(const GrainShape& shape);
/// Largest distance from the grain center to a grain point.
double grain_circumradius(const GrainShape& shape);
std::string describe(const GrainShape& shape);

/// Periodic microstructure template Y = (0,1)^2 sampled on an m x m grid.
/// A cell is solid iff its center lies in the closed grain. The annulus
/// Y_{r\s} is disc(center, r_r) minus the grain.
class UnitCell {
 public:
  static UnitCell build(const GrainShape& shape, int m,
                        std::optional<double> annulus_radius = std::nullopt);

  int resolution() const { return m_; }
  double h() const { return 1.0 / m_; }
  const GrainShape& shape() const { return shape_; }
  double annulus_radius() const { return annulus_radius_; }

  bool solid(int i, int j) const { return solid_[index(i, j)] != 0; }
  bool annulus(int i, int j) const { return annulus_[index(i, j)] != 0; }
  const std::vector<std::uint8_t>& solid_mask() const { return solid_; }
  const std::vector<std::uint8_t>& annulus_mask() const { return annulus_; }

  std::size_t solid_cells() const { return solid_count_; }
  std::size_t annulus_cells() const { return annulus_count_; }
  /// |Y_s| measured by cell counting.
  double solid_fraction() const { return static_cast<double>(solid_count_) / (static_cast<double>(m_) * m_); }
  /// theta = 1 - |Y_s|.
  double porosity() const { return 1.0 - solid_fraction(); }
  double analytic_porosity() const { return 1.0 - grain_area(shape_); }
  /// Identifies shape, resolution and annulus; equal fingerprints mean the
  /// same discrete cell.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * m_ + i; }

  GrainShape shape_;
  int m_ = 0;
  double annulus_radius_ = 0.0;
  std::vector<std::uint8_t> solid_;
  std::vector<std::uint8_t> annulus_;
  std::size_t solid_count_ = 0;
  std::size_t annulus_count_ = 0;
  std::string fingerprint_;
};

/// Default annulus radius: min(R_s + 0.15, 0.45), pulled halfway towards the
/// cell wall when that is not larger than the grain.
double default_annulus_radius(const GrainShape& shape);

/// Axis-aligned rectangle standing in for Omega.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double diameter() const;
  bool operator==(const Rect&) const = default;
};

/// Perforated domain Omega_eps on a Cartesian grid. Grains are stamped only
/// in cell copies eps(Y + k) lying inside Omega without touching its boundary.
/// Each copy spans eps/h grid cells; the unit-cell mask is replicated by
/// blocks of (eps/h)/m.
class DomainMask;
/// Grid covering Omega with no grains (all fluid); used for effective runs
/// and unperforated test problems.
DomainMask unperforated(const Rect& omega, double h);

class DomainMask {
 public:
  static DomainMask build(std::shared_ptr<const UnitCell> cell, const Rect& omega, double eps,
                          std::optional<double> h = std::nullopt);

  const GridSpec& grid() const { return grid_; }
  const Rect& omega() const { return omega_; }
  double eps() const { return eps_; }
  int cells_per_copy() const { return cells_per_copy_; }
  int block_factor() const { return block_; }
  const UnitCell& cell() const { return *cell_; }
  std::shared_ptr<const UnitCell> cell_ptr() const { return cell_; }

  bool fluid(int i, int j) const { return fluid_[grid_.index(i, j)] != 0; }
  bool fluid(std::size_t k) const { return fluid_[k] != 0; }
  const std::vector<std::uint8_t>& fluid_mask() const { return fluid_; }
  /// True for cells inside Omega_K (union of the interior copies).
  bool in_omega_k(int i, int j) const { return copy_[grid_.index(i, j)] >= 0; }
  /// Index into copies() of the interior copy containing the cell, or -1.
  int copy_of(std::size_t k) const { return copy_[k]; }
  bool annulus(std::size_t k) const { return annulus_[k] != 0; }
  /// K_eps as integer lattice indices.
  const std::vector<std::array<int, 2>>& copies() const { return copies_; }

  std::size_t fluid_cells() const { return fluid_count_; }
  double fluid_area() const { return fluid_count_ * grid_.cell_area(); }
  double omega_k_area() const;
  double omega_k_fluid_area() const;
  /// |Omega \ Omega_K|.
  double boundary_layer_area() const;
  /// |Omega_{K,eps}| / |Omega_K| (NaN when K_eps is empty).
  double measured_porosity() const;

  /// "MASK nx ny h\n" followed by nx*ny bytes, row-major, 1 = fluid.
  void dump(std::ostream& out) const;

  bool has_cell() const { return static_cast<bool>(cell_); }

 private:
  friend DomainMask unperforated(const Rect& omega, double h);

  std::shared_ptr<const UnitCell> cell_;
  Rect omega_{};
  GridSpec grid_{};
  double eps_ = 0.0;
  int cells_per_copy_ = 0;
  int block_ = 0;
  std::vector<std::uint8_t> fluid_;
  std::vector<std::uint8_t> annulus_;
  std::vector<int> copy_;
  std::vector<std::array<int, 2>> copies_;
  std::size_t fluid_count_ = 0;
};


/// Rounds x to the nearest integer, throwing ConfigError if it is not within
/// a relative 1e-9 of one.
int require_integer(double x, const char* what);

}  // namespace korteweg
