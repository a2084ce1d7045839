#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace korteweg {

/// Uniform Cartesian grid of nx by ny square cells of side h, origin at
/// (x0, y0). Cell (i, j) has center (x0 + (i + 1/2) h, y0 + (j + 1/2) h).
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;

  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  double xc(int i) const { return x0 + (i + 0.5) * h; }
  double yc(int j) const { return y0 + (j + 0.5) * h; }
  double cell_area() const { return h * h; }

  bool operator==(const GridSpec&) const = default;
};

/// Cell-centered scalar field, row-major with x fastest.
class CellField {
 public:
  CellField() = default;
  explicit CellField(const GridSpec& grid, double value = 0.0)
      : grid_(grid), data_(grid.cells(), value) {}

  const GridSpec& grid() const { return grid_; }
  double& operator()(int i, int j) { return data_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return data_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }
  std::size_t size() const { return data_.size(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

 private:
  GridSpec grid_{};
  std::vector<double> data_;
};

/// Staggered (MAC) velocity. On a bounded grid x-faces are (nx + 1) x ny and
/// y-faces nx x (ny + 1); on a periodic grid both are nx x ny with face i
/// sitting on the left/bottom edge of cell i.
class FaceField {
 public:
  FaceField() = default;
  FaceField(const GridSpec& grid, bool periodic)
      : grid_(grid),
        periodic_(periodic),
        x_(static_cast<std::size_t>(xface_nx()) * grid.ny, 0.0),
        y_(static_cast<std::size_t>(grid.nx) * yface_ny(), 0.0) {}

  const GridSpec& grid() const { return grid_; }
  bool periodic() const { return periodic_; }
  int xface_nx() const { return periodic_ ? grid_.nx : grid_.nx + 1; }
  int yface_ny() const { return periodic_ ? grid_.ny : grid_.ny + 1; }

  std::size_t xindex(int i, int j) const { return static_cast<std::size_t>(j) * xface_nx() + i; }
  std::size_t yindex(int i, int j) const { return static_cast<std::size_t>(j) * grid_.nx + i; }

  double& x(int i, int j) { return x_[xindex(i, j)]; }
  double x(int i, int j) const { return x_[xindex(i, j)]; }
  double& y(int i, int j) { return y_[yindex(i, j)]; }
  double y(int i, int j) const { return y_[yindex(i, j)]; }

  std::vector<double>& xs() { return x_; }
  const std::vector<double>& xs() const { return x_; }
  std::vector<double>& ys() { return y_; }
  const std::vector<double>& ys() const { return y_; }

 private:
  GridSpec grid_{};
  bool periodic_ = false;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Fixed-order compensated sum; used wherever a reproducible total matters
/// (mass bookkeeping, norms written to CSV).
double stable_sum(std::span<const double> values);

/// Running compensated accumulator.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double max_abs(std::span<const double> values);

}  // namespace korteweg
