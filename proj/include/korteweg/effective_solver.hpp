#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "korteweg/constitutive.hpp"
#include "korteweg/geometry.hpp"
#include "korteweg/grid.hpp"
#include "korteweg/nonlocal.hpp"

namespace korteweg {

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct EffectiveConfig {
  double theta = 0.8;
  Matrix2 A{{{1.0, 0.0}, {0.0, 1.0}}};
  double mu = 1.0;
  double T = 1.0;
  double cfl = 0.4;
  std::optional<double> fixed_dt;
  std::optional<int> max_steps;
  /// Allows theta = 1 (no grain); meant for reduction tests only.
  bool theta_override = false;

  void validate() const;
};

/// Coefficients of the driving force gamma theta rho grad(phi *_0 rho - rho)
/// - grad(p + gamma (1 - theta) rho^2 / 2).
struct EffectiveCoefficients {
  double nonlocal = 0.0;   ///< gamma theta
  double quadratic = 0.0;  ///< gamma (1 - theta) / 2
};
EffectiveCoefficients effective_coefficients(double theta, double gamma);

struct EffectiveFlux {
  FaceField J;      ///< rho_upwind * u, zero on boundary faces
  FaceField u;      ///< Darcy velocity A F / mu
  FaceField force;  ///< face-normal driving force F
};

/// Face flux of the limit equation on the unperforated grid of Omega. Face
/// gradients are centred; the transverse force at a face is the mean of the
/// four neighbouring orthogonal faces; mobility rho is upwinded by the sign of
/// the face-normal Darcy velocity.
EffectiveFlux effective_flux(const CellField& rho, const EffectiveConfig& cfg, const DomainMask& omega,
                             const Kernel& kernel, const PressureLaw& law);

/// J = -(1/mu) rho_up A grad p(rho), same face layout and upwinding.
EffectiveFlux porous_medium_flux(const CellField& rho, const Matrix2& A, double mu, const PressureLaw& law);

/// Minimum of the diffusive bound sigma theta h^2 / (4 D_max),
/// D_max = max rho |A| (|Q'(rho)| + 2 gamma theta rho) / mu, and the donor
/// positivity bound.
double effective_dt_limit(const CellField& rho, const EffectiveFlux& flux, const EffectiveConfig& cfg,
                          const PressureLaw& law, double sigma);

struct EffectiveState {
  double t = 0.0;
  CellField rho;
  FaceField J;
};

/// rho' = rho - (dt / theta) div_h J. Throws SolverError when dt exceeds the
/// stability bound (sigma = 1) or the result is negative beyond round-off.
EffectiveState step_effective(const EffectiveState& state, double dt, const EffectiveConfig& cfg,
                              const DomainMask& omega, const Kernel& kernel, const PressureLaw& law);

struct EffectiveRow {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;  ///< theta h^2 sum rho
  double max_J = 0.0;
  double bimodality = 0.0;
};

struct EffectiveSnapshot {
  double t = 0.0;
  CellField rho;
  EffectiveFlux flux;
};

struct EffectiveRun {
  std::vector<EffectiveRow> rows;
  std::vector<EffectiveSnapshot> snapshots;
  EffectiveState final_state;
  int steps = 0;
};

/// Called after each snapshot is taken; returning true ends the run there.
using SnapshotStop = std::function<bool(const EffectiveSnapshot&)>;

EffectiveRun run_effective(const CellField& rho0, const EffectiveConfig& cfg, const DomainMask& omega,
                           const Kernel& kernel, const PressureLaw& law,
                           const std::vector<double>& snapshot_times = {}, const SnapshotStop& stop = {});

/// Sarle's bimodality coefficient (g^2 + 1) / (k + 3 (n-1)^2 / ((n-2)(n-3)))
/// of the cell values; above 5/9 suggests a bimodal histogram.
double bimodality_coefficient(const std::vector<double>& values);

}  // namespace korteweg
