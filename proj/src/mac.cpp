#include "korteweg/mac.hpp"

#include "korteweg/error.hpp"

namespace korteweg {

MacOperators::MacOperators(const GridSpec& grid, const std::vector<std::uint8_t>& fluid, bool periodic)
    : grid_(grid),
      periodic_(periodic),
      xnx_(periodic ? grid.nx : grid.nx + 1),
      yny_(periodic ? grid.ny : grid.ny + 1),
      fluid_(fluid) {
  if (fluid_.size() != grid.cells()) throw PreconditionError("fluid mask size does not match the grid");
  const int nx = grid.nx, ny = grid.ny;
  x_dof_.assign(static_cast<std::size_t>(xnx_) * ny, -1);
  y_dof_.assign(static_cast<std::size_t>(nx) * yny_, -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < xnx_; ++i)
      if (cell_fluid(left(i), j) && cell_fluid(i, j)) {
        x_dof_[xface_index(i, j)] = static_cast<int>(x_faces_.size());
        x_faces_.push_back({i, j});
      }
  const int nxd = static_cast<int>(x_faces_.size());
  for (int j = 0; j < yny_; ++j)
    for (int i = 0; i < nx; ++i)
      if (cell_fluid(i, below(j)) && cell_fluid(i, j)) {
        y_dof_[yface_index(i, j)] = nxd + static_cast<int>(y_faces_.size());
        y_faces_.push_back({i, j});
      }

  const double ih2 = 1.0 / (grid.h * grid.h);
  const int n = velocity_dofs();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);

  auto wrap_x = [&](int i) { return periodic_ ? (i + nx) % nx : i; };
  auto wrap_y = [&](int j) { return periodic_ ? (j + ny) % ny : j; };

  // Neighbour of an x-face along x (normal direction): inactive means the
  // wall passes through the neighbour location.
  for (int d = 0; d < nxd; ++d) {
    const auto [i, j] = x_faces_[d];
    double diag = 0.0;
    for (int di : {-1, 1}) {
      const int ni = periodic_ ? (i + di + xnx_) % xnx_ : i + di;
      const int nd = (ni >= 0 && ni < xnx_) ? x_dof(ni, j) : -1;
      diag += ih2;
      if (nd >= 0) trip.emplace_back(d, nd, -ih2);
    }
    for (int dj : {-1, 1}) {
      const int nj = wrap_y(j + dj);
      if (nj < 0 || nj >= ny) {
        diag += 2.0 * ih2;
        continue;
      }
      const int nd = x_dof(i, nj);
      if (nd >= 0) {
        diag += ih2;
        trip.emplace_back(d, nd, -ih2);
      } else {
        const int fluid_count = int(cell_fluid(left(i), nj)) + int(cell_fluid(i, nj));
        diag += fluid_count == 0 ? 2.0 * ih2 : ih2;
      }
    }
    trip.emplace_back(d, d, diag);
  }
  for (int e = 0; e < static_cast<int>(y_faces_.size()); ++e) {
    const int d = nxd + e;
    const auto [i, j] = y_faces_[e];
    double diag = 0.0;
    for (int dj : {-1, 1}) {
      const int nj = periodic_ ? (j + dj + yny_) % yny_ : j + dj;
      const int nd = (nj >= 0 && nj < yny_) ? y_dof(i, nj) : -1;
      diag += ih2;
      if (nd >= 0) trip.emplace_back(d, nd, -ih2);
    }
    for (int di : {-1, 1}) {
      const int ni = wrap_x(i + di);
      if (ni < 0 || ni >= nx) {
        diag += 2.0 * ih2;
        continue;
      }
      const int nd = y_dof(ni, j);
      if (nd >= 0) {
        diag += ih2;
        trip.emplace_back(d, nd, -ih2);
      } else {
        const int fluid_count = int(cell_fluid(ni, below(j))) + int(cell_fluid(ni, j));
        diag += fluid_count == 0 ? 2.0 * ih2 : ih2;
      }
    }
    trip.emplace_back(d, d, diag);
  }
  laplacian_.resize(n, n);
  laplacian_.setFromTriplets(trip.begin(), trip.end());

  trip.clear();
  const double ih = 1.0 / grid.h;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int row = static_cast<int>(grid.index(i, j));
      const int right = periodic_ ? (i + 1) % nx : i + 1;
      const int top = periodic_ ? (j + 1) % ny : j + 1;
      if (const int d = x_dof(right, j); d >= 0) trip.emplace_back(row, d, ih);
      if (const int d = x_dof(i, j); d >= 0) trip.emplace_back(row, d, -ih);
      if (const int d = y_dof(i, top); d >= 0) trip.emplace_back(row, d, ih);
      if (const int d = y_dof(i, j); d >= 0) trip.emplace_back(row, d, -ih);
    }
  }
  divergence_.resize(static_cast<int>(grid.cells()), n);
  divergence_.setFromTriplets(trip.begin(), trip.end());
}

bool MacOperators::cell_fluid(int i, int j) const {
  if (periodic_) {
    i = (i % grid_.nx + grid_.nx) % grid_.nx;
    j = (j % grid_.ny + grid_.ny) % grid_.ny;
  } else if (i < 0 || j < 0 || i >= grid_.nx || j >= grid_.ny) {
    return false;
  }
  return fluid_[grid_.index(i, j)] != 0;
}

SparseMatrix MacOperators::momentum_operator(double mu, double xi) const {
  SparseMatrix a = mu * laplacian_;
  if (xi != 0.0) {
    SparseMatrix dtd = SparseMatrix(divergence_.transpose()) * divergence_;
    a += xi * dtd;
  }
  a.makeCompressed();
  return a;
}

Vector MacOperators::pack(const FaceField& u) const {
  if (u.periodic() != periodic_ || !(u.grid() == grid_)) throw PreconditionError("face field layout mismatch");
  Vector v(velocity_dofs());
  int d = 0;
  for (const auto& [i, j] : x_faces_) v[d++] = u.x(i, j);
  for (const auto& [i, j] : y_faces_) v[d++] = u.y(i, j);
  return v;
}

FaceField MacOperators::unpack(const Vector& v) const {
  FaceField u(grid_, periodic_);
  int d = 0;
  for (const auto& [i, j] : x_faces_) u.x(i, j) = v[d++];
  for (const auto& [i, j] : y_faces_) u.y(i, j) = v[d++];
  return u;
}

Vector MacOperators::face_gradient(const CellField& f) const {
  Vector g(velocity_dofs());
  const double ih = 1.0 / grid_.h;
  int d = 0;
  for (const auto& [i, j] : x_faces_) g[d++] = (f(i, j) - f(left(i), j)) * ih;
  for (const auto& [i, j] : y_faces_) g[d++] = (f(i, j) - f(i, below(j))) * ih;
  return g;
}

CellField MacOperators::divergence_of(const FaceField& u) const {
  const Vector div = divergence_ * pack(u);
  CellField out(grid_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = div[static_cast<Eigen::Index>(k)];
  return out;
}

}  // namespace korteweg
