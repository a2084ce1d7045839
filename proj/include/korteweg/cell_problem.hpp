#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "korteweg/geometry.hpp"
#include "korteweg/grid.hpp"

namespace korteweg {

enum class StokesMethod { uzawa, direct };

struct CellSolveOptions {
  StokesMethod method = StokesMethod::uzawa;
  double tolerance = 1e-12;   ///< relative residual of the pressure Schur solve
  int max_iterations = 5000;
  /// Each unit-cell mask cell is split into refine x refine solver cells.
  int refine = 1;
};

/// Periodic Stokes solution -Delta v + grad q = e_i, div v = 0 on Y_f,
/// v = 0 on the grain, with the pressure normalized to zero mean.
struct CellStokesSolution {
  int index = 0;  ///< forcing direction, 0 for e_1 and 1 for e_2
  FaceField v;    ///< periodic layout on the m x m grid
  CellField q;    ///< zero on cells without pressure unknown
  std::vector<std::uint8_t> pressure_cells;
  double divergence_residual = 0.0;  ///< max |div v|
  double momentum_residual = 0.0;    ///< max |L v - D^T q - e_i|
  int iterations = 0;
  StokesMethod method = StokesMethod::uzawa;
};

struct PermeabilityMatrix {
  std::array<std::array<double, 2>, 2> A{};  ///< A[j][i] = int_Y (v_i)_j
  int resolution = 0;
  double tolerance = 0.0;
  std::array<double, 2> divergence_residual{};
  std::array<double, 2> momentum_residual{};
  double asymmetry() const { return std::abs(A[0][1] - A[1][0]); }
  /// Eigenvalues of the symmetric part, ascending.
  std::array<double, 2> eigenvalues() const;
};

/// Throws ConfigError("ill-posed: no solid obstacle") for an empty grain and
/// SolverError when the iteration budget is exhausted.
CellStokesSolution solve_cell_problem(const UnitCell& cell, int index, const CellSolveOptions& opts = {});

/// int_Y (v)_j by midpoint quadrature over faces.
std::array<double, 2> cell_average(const CellStokesSolution& sol);
/// Same average computed from cell-centred interpolants of v.
std::array<double, 2> cell_average_centered(const CellStokesSolution& sol);

PermeabilityMatrix permeability(const UnitCell& cell, const CellSolveOptions& opts = {});
PermeabilityMatrix permeability_from(const CellStokesSolution& s1, const CellStokesSolution& s2, double tolerance);

/// Rescaled periodic continuation on a perforated domain.
struct RescaledCellFields {
  FaceField v;                 ///< v_i(x / eps) on all of Omega, bounded layout
  CellField q;                 ///< q_i(x / eps) on Omega_{K,eps}, 0 elsewhere
  std::vector<std::uint8_t> q_support;
  double v_sup = 0.0;          ///< ||v^eps||_inf
  double eps_grad_v_sup = 0.0; ///< eps ||D v^eps||_inf from face differences
  double q_sup = 0.0;
  double eps_grad_q_sup = 0.0;
};

/// Requires the mask to be built from the same unit cell with h = eps / m.
RescaledCellFields rescale_periodic(const CellStokesSolution& sol, const UnitCell& cell, const DomainMask& mask);

}  // namespace korteweg
