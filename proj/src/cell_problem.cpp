#include "korteweg/cell_problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "korteweg/error.hpp"
#include "korteweg/mac.hpp"

namespace korteweg {
namespace {

struct PressureSpace {
  std::vector<int> cells;  // grid cell of each pressure dof
  SparseMatrix div;        // rows restricted to pressure cells
};

PressureSpace pressure_space(const MacOperators& ops) {
  const SparseMatrix& d = ops.divergence();
  PressureSpace ps;
  SparseMatrix dr = d.transpose();  // columns = cells
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < dr.outerSize(); ++c) {
    bool any = false;
    for (SparseMatrix::InnerIterator it(dr, c); it; ++it) any = any || it.value() != 0.0;
    if (!any) continue;
    const int row = static_cast<int>(ps.cells.size());
    ps.cells.push_back(c);
    for (SparseMatrix::InnerIterator it(dr, c); it; ++it)
      trip.emplace_back(row, static_cast<int>(it.row()), it.value());
  }
  ps.div.resize(static_cast<int>(ps.cells.size()), ops.velocity_dofs());
  ps.div.setFromTriplets(trip.begin(), trip.end());
  return ps;
}

void remove_mean(Vector& q) {
  if (q.size() > 0) q.array() -= q.mean();
}

}  // namespace

CellStokesSolution solve_cell_problem(const UnitCell& cell, int index, const CellSolveOptions& opts) {
  if (index < 0 || index > 1) throw PreconditionError("cell problem index must be 0 or 1");
  if (cell.solid_cells() == 0) throw ConfigError("ill-posed: no solid obstacle");
  if (opts.refine < 1) throw ConfigError("cell refinement must be >= 1");

  const int m = cell.resolution();
  const int n = m * opts.refine;
  const GridSpec grid{n, n, 1.0 / n, 0.0, 0.0};
  std::vector<std::uint8_t> fluid(grid.cells());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) fluid[grid.index(i, j)] = cell.solid(i / opts.refine, j / opts.refine) ? 0 : 1;

  const MacOperators ops(grid, fluid, true);
  const PressureSpace ps = pressure_space(ops);
  const int nv = ops.velocity_dofs();
  const int np = static_cast<int>(ps.cells.size());

  Vector e = Vector::Zero(nv);
  if (index == 0) e.head(ops.x_dofs()).setOnes();
  else e.tail(nv - ops.x_dofs()).setOnes();

  CellStokesSolution sol;
  sol.index = index;
  sol.method = opts.method;
  Vector v, q;

  if (opts.method == StokesMethod::uzawa) {
    Eigen::SimplicialLDLT<SparseMatrix> chol(ops.laplacian());
    if (chol.info() != Eigen::Success) throw SolverError("factorization of the cell Laplacian failed");
    const SparseMatrix dt = ps.div.transpose();
    auto schur = [&](const Vector& x) -> Vector {
      Vector y = ps.div * chol.solve(dt * x);
      remove_mean(y);
      return y;
    };
    Vector b = -(ps.div * chol.solve(e));
    remove_mean(b);
    q = Vector::Zero(np);
    Vector r = b;
    Vector p = r;
    double rr = r.squaredNorm();
    const double target = opts.tolerance * opts.tolerance * std::max(b.squaredNorm(), 1e-300);
    int it = 0;
    while (rr > target) {
      if (it >= opts.max_iterations) {
        std::ostringstream msg;
        msg << "pressure Schur iteration did not converge in " << opts.max_iterations
            << " iterations (relative residual " << std::sqrt(rr / b.squaredNorm()) << ")";
        throw SolverError(msg.str(), std::sqrt(rr));
      }
      const Vector sp = schur(p);
      const double alpha = rr / p.dot(sp);
      q += alpha * p;
      r -= alpha * sp;
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
      ++it;
    }
    remove_mean(q);
    sol.iterations = it;
    v = chol.solve(e + dt * q);
  } else {
    // Saddle system [L, -D^T; -D, 0] with the last pressure unknown pinned.
    const int npk = np - 1;
    std::vector<Eigen::Triplet<double>> trip;
    const SparseMatrix& lap = ops.laplacian();
    for (int c = 0; c < lap.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(lap, c); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int c = 0; c < ps.div.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(ps.div, c); it; ++it) {
        const int prow = static_cast<int>(it.row());
        if (prow >= npk) continue;
        trip.emplace_back(nv + prow, static_cast<int>(it.col()), -it.value());
        trip.emplace_back(static_cast<int>(it.col()), nv + prow, -it.value());
      }
    SparseMatrix kkt(nv + npk, nv + npk);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(kkt);
    lu.factorize(kkt);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization of the cell saddle system failed");
    Vector rhs = Vector::Zero(nv + npk);
    rhs.head(nv) = e;
    const Vector x = lu.solve(rhs);
    v = x.head(nv);
    q = Vector::Zero(np);
    q.head(npk) = x.tail(npk);
    remove_mean(q);
    sol.iterations = 1;
  }

  const Vector div = ps.div * v;
  const Vector mom = ops.laplacian() * v - ps.div.transpose() * q - e;
  sol.divergence_residual = div.size() ? div.cwiseAbs().maxCoeff() : 0.0;
  sol.momentum_residual = mom.size() ? mom.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(sol.divergence_residual) || !std::isfinite(sol.momentum_residual))
    throw SolverError("cell problem produced non-finite values");

  sol.v = ops.unpack(v);
  sol.q = CellField(grid);
  sol.pressure_cells.assign(grid.cells(), 0);
  for (int k = 0; k < np; ++k) {
    sol.q[ps.cells[k]] = q[k];
    sol.pressure_cells[ps.cells[k]] = 1;
  }
  return sol;
}

std::array<double, 2> cell_average(const CellStokesSolution& sol) {
  const double area = sol.v.grid().cell_area();
  KahanSum sx, sy;
  for (double x : sol.v.xs()) sx.add(x);
  for (double y : sol.v.ys()) sy.add(y);
  return {area * sx.value(), area * sy.value()};
}

std::array<double, 2> cell_average_centered(const CellStokesSolution& sol) {
  const auto& g = sol.v.grid();
  KahanSum sx, sy;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      sx.add(0.5 * (sol.v.x(i, j) + sol.v.x((i + 1) % g.nx, j)));
      sy.add(0.5 * (sol.v.y(i, j) + sol.v.y(i, (j + 1) % g.ny)));
    }
  return {g.cell_area() * sx.value(), g.cell_area() * sy.value()};
}

std::array<double, 2> PermeabilityMatrix::eigenvalues() const {
  const double a = A[0][0], d = A[1][1], b = 0.5 * (A[0][1] + A[1][0]);
  const double mid = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mid - rad, mid + rad};
}

PermeabilityMatrix permeability_from(const CellStokesSolution& s1, const CellStokesSolution& s2, double tolerance) {
  PermeabilityMatrix pm;
  pm.resolution = s1.v.grid().nx;
  pm.tolerance = tolerance;
  const auto c1 = cell_average(s1);
  const auto c2 = cell_average(s2);
  pm.A[0][0] = c1[0];
  pm.A[1][0] = c1[1];
  pm.A[0][1] = c2[0];
  pm.A[1][1] = c2[1];
  pm.divergence_residual = {s1.divergence_residual, s2.divergence_residual};
  pm.momentum_residual = {s1.momentum_residual, s2.momentum_residual};
  return pm;
}

PermeabilityMatrix permeability(const UnitCell& cell, const CellSolveOptions& opts) {
  const auto s1 = solve_cell_problem(cell, 0, opts);
  const auto s2 = solve_cell_problem(cell, 1, opts);
  return permeability_from(s1, s2, opts.tolerance);
}

RescaledCellFields rescale_periodic(const CellStokesSolution& sol, const UnitCell& cell, const DomainMask& mask) {
  if (!mask.has_cell() || mask.cell().fingerprint() != cell.fingerprint())
    throw ConfigError("perforated domain was not built from this unit cell");
  const int n = sol.v.grid().nx;
  if (mask.cells_per_copy() != n)
    throw ConfigError("rescaling needs eps / h equal to the cell-solution resolution");
  const auto& g = mask.grid();
  const int ox = require_integer(g.x0 / g.h, "domain origin / h");
  const int oy = require_integer(g.y0 / g.h, "domain origin / h");
  auto loc = [n](int k) { return ((k % n) + n) % n; };

  RescaledCellFields out;
  out.v = FaceField(g, false);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) out.v.x(i, j) = sol.v.x(loc(ox + i), loc(oy + j));
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.v.y(i, j) = sol.v.y(loc(ox + i), loc(oy + j));

  out.q = CellField(g);
  out.q_support.assign(g.cells(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const std::size_t lk = sol.q.grid().index(loc(ox + i), loc(oy + j));
      if (mask.in_omega_k(i, j) && mask.fluid(k) && sol.pressure_cells[lk]) {
        out.q[k] = sol.q[lk];
        out.q_support[k] = 1;
      }
    }

  const double eps_over_h = mask.eps() / g.h;
  double gv = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      out.v_sup = std::max(out.v_sup, std::abs(out.v.x(i, j)));
      if (i < g.nx) gv = std::max(gv, std::abs(out.v.x(i + 1, j) - out.v.x(i, j)));
      if (j + 1 < g.ny) gv = std::max(gv, std::abs(out.v.x(i, j + 1) - out.v.x(i, j)));
    }
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      out.v_sup = std::max(out.v_sup, std::abs(out.v.y(i, j)));
      if (j < g.ny) gv = std::max(gv, std::abs(out.v.y(i, j + 1) - out.v.y(i, j)));
      if (i + 1 < g.nx) gv = std::max(gv, std::abs(out.v.y(i + 1, j) - out.v.y(i, j)));
    }
  out.eps_grad_v_sup = eps_over_h * gv;

  double gq = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!out.q_support[k]) continue;
      out.q_sup = std::max(out.q_sup, std::abs(out.q[k]));
      if (i + 1 < g.nx && out.q_support[k + 1]) gq = std::max(gq, std::abs(out.q[k + 1] - out.q[k]));
      if (j + 1 < g.ny && out.q_support[k + g.nx]) gq = std::max(gq, std::abs(out.q[k + g.nx] - out.q[k]));
    }
  out.eps_grad_q_sup = eps_over_h * gq;
  return out;
}

}  // namespace korteweg
