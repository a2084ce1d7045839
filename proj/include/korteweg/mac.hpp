#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Sparse>

#include "korteweg/grid.hpp"

namespace korteweg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Staggered-grid operators on the fluid part of a grid. A face is active
/// (an unknown) iff both adjacent cells are fluid; on a bounded grid the
/// outer boundary faces are never active. Inactive faces carry zero
/// velocity.
///
/// The vector Laplacian L approximates -Delta with no-slip walls: an inactive
/// neighbour along the velocity component sits on the wall itself (value 0 at
/// distance h); an inactive tangential neighbour is mirrored (ghost value -u)
/// when the wall lies half a cell away and set to 0 at distance h when it is
/// a solid edge.
class MacOperators {
 public:
  MacOperators(const GridSpec& grid, const std::vector<std::uint8_t>& fluid, bool periodic);

  const GridSpec& grid() const { return grid_; }
  bool periodic() const { return periodic_; }
  int velocity_dofs() const { return static_cast<int>(x_faces_.size() + y_faces_.size()); }
  int x_dofs() const { return static_cast<int>(x_faces_.size()); }

  /// Dof of an x-face / y-face or -1 when inactive.
  int x_dof(int i, int j) const { return x_dof_[xface_index(i, j)]; }
  int y_dof(int i, int j) const { return y_dof_[yface_index(i, j)]; }

  /// -Delta_h on active faces (SPD).
  const SparseMatrix& laplacian() const { return laplacian_; }
  /// Discrete divergence, one row per grid cell.
  const SparseMatrix& divergence() const { return divergence_; }
  /// mu L + xi D^T D, the operator of -mu Delta u - xi grad div u.
  SparseMatrix momentum_operator(double mu, double xi) const;

  Vector pack(const FaceField& u) const;
  FaceField unpack(const Vector& v) const;

  /// Face-normal difference (f(right) - f(left)) / h on active faces.
  Vector face_gradient(const CellField& f) const;
  /// Cell divergence of a face field, inactive faces ignored.
  CellField divergence_of(const FaceField& u) const;

  /// Cell (i, j) adjacent to x-face (i, j) on the left, wrapped when periodic.
  int left(int i) const { return periodic_ ? (i + grid_.nx - 1) % grid_.nx : i - 1; }
  int below(int j) const { return periodic_ ? (j + grid_.ny - 1) % grid_.ny : j - 1; }

  const std::vector<std::array<int, 2>>& x_faces() const { return x_faces_; }
  const std::vector<std::array<int, 2>>& y_faces() const { return y_faces_; }

 private:
  std::size_t xface_index(int i, int j) const { return static_cast<std::size_t>(j) * xnx_ + i; }
  std::size_t yface_index(int i, int j) const { return static_cast<std::size_t>(j) * grid_.nx + i; }
  bool cell_fluid(int i, int j) const;

  GridSpec grid_;
  bool periodic_;
  int xnx_, yny_;
  std::vector<std::uint8_t> fluid_;
  std::vector<int> x_dof_, y_dof_;
  std::vector<std::array<int, 2>> x_faces_, y_faces_;
  SparseMatrix laplacian_;
  SparseMatrix divergence_;
};

}  // namespace korteweg
