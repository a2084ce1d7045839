#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/SparseCholesky>

#include "korteweg/constitutive.hpp"
#include "korteweg/free_energy.hpp"
#include "korteweg/geometry.hpp"
#include "korteweg/mac.hpp"
#include "korteweg/nonlocal.hpp"

namespace korteweg {

/// How a cell density is carried to a face.
///  - upwind: donor cell by the sign of the face velocity (transport only);
///  - arithmetic: mean of the two cells;
///  - energy_consistent: (P(r) - P(l)) / (G(r) - G(l)), the unique face
///    density for which the force balance and the transport flux reproduce
///    the continuous energy identity exactly in space.
enum class FaceDensityRule { upwind, arithmetic, energy_consistent };

struct PoreConfig {
  double mu = 1.0;
  double xi = 0.0;
  double eps = 0.25;   ///< time scaling omega = eps^2
  double T = 1.0;
  double cfl = 0.4;    ///< sigma in (0, 1)
  double momentum_tolerance = 1e-10;
  int output_every = 1;  ///< diagnostics row cadence in steps
  std::optional<double> fixed_dt;
  std::optional<int> max_steps;
  FaceDensityRule face_density = FaceDensityRule::energy_consistent;

  void validate() const;
};

struct PoreState {
  double t = 0.0;
  CellField rho;
  FaceField u;
};

/// Factorized momentum operator mu L + xi D^T D on the fluid faces of a mask
/// with no-slip on every boundary of Omega_eps.
class MomentumSolver {
 public:
  MomentumSolver(const DomainMask& mask, double mu, double xi);

  const MacOperators& ops() const { return ops_; }
  const SparseMatrix& matrix() const { return a_; }
  double mu() const { return mu_; }
  double xi() const { return xi_; }

  /// Solves A u = f; throws SolverError if the residual exceeds tolerance
  /// (relative to |f|).
  Vector solve(const Vector& f, double tolerance = 1e-10) const;
  /// h^2 u^T A u = int mu |grad u|^2 + xi (div u)^2.
  double dissipation(const Vector& u) const;
  /// ||u||_{L2} and ||Du||_{L2}.
  double l2_norm(const Vector& u) const;
  double grad_norm(const Vector& u) const;

 private:
  double mu_, xi_;
  MacOperators ops_;
  SparseMatrix a_;
  Eigen::SimplicialLDLT<SparseMatrix> chol_;
};

/// Face densities on the active faces (dof order of the operators).
Vector face_density(const CellField& rho, const MacOperators& ops, FaceDensityRule rule,
                    const EnergyFunction& energy, const Vector* u = nullptr);

/// Canonical force gamma rho_f grad(phi *_eps rho) - grad P(rho) on active faces.
Vector momentum_rhs(const CellField& rho, const DomainMask& mask, const MacOperators& ops, const Kernel& kernel,
                    const EnergyFunction& energy, const Vector& rho_face);
/// Pressure form -grad p(rho) + gamma rho_f grad D[rho]; equals the canonical
/// form exactly when rho_f is the arithmetic mean.
Vector momentum_rhs_pressure_form(const CellField& rho, const DomainMask& mask, const MacOperators& ops,
                                  const Kernel& kernel, const EnergyFunction& energy, const Vector& rho_face);

/// One momentum solve for a density state.
FaceField solve_momentum(const CellField& rho, const DomainMask& mask, const Kernel& kernel,
                         const EnergyFunction& energy, const PoreConfig& cfg);

/// Largest dt with sigma-positivity of the explicit update:
/// dt <= sigma eps^2 rho_i h / (sum of outgoing |flux| of cell i).
double transport_dt_limit(const CellField& rho, const MacOperators& ops, const Vector& flux, double eps,
                          double sigma);

/// rho' = rho - (dt / eps^2) div_h(F) with F = rho_f u on active faces.
/// rho_face may be null for upwind. Throws SolverError on CFL violation and
/// when rho' < -1e-14.
PoreState advance_density(const PoreState& state, const FaceField& u, double dt, const DomainMask& mask,
                          double eps, FaceDensityRule rule = FaceDensityRule::upwind,
                          const EnergyFunction* energy = nullptr, double sigma = 1.0);

struct PoreDiagnostics {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  FreeEnergy energy;
  double dissipation = 0.0;
  double residual = 0.0;  ///< (E(t + dt) - E(t)) / dt + D(t)
  double max_u = 0.0;
  double u_l2 = 0.0;
  double du_l2 = 0.0;
  double w_integral = 0.0;  ///< int_{Omega_eps} W(rho)
  double rho_l2 = 0.0;
};

struct PoreSnapshot {
  double t = 0.0;
  CellField rho;
  FaceField u;
};

struct PoreRun {
  std::vector<PoreDiagnostics> rows;
  std::vector<PoreSnapshot> snapshots;
  PoreState final_state;
  int steps = 0;
  double max_residual = 0.0;
  double max_energy_increase = 0.0;  ///< max over steps of (E(n+1) - E(n))^+
};

/// Quasi-static splitting: solve momentum at the current density, choose dt,
/// transport, repeat until T. Snapshots are taken exactly at the requested
/// times (dt is shortened to land on them).
PoreRun run_pore(const CellField& rho0, const PoreConfig& cfg, const DomainMask& mask, const Kernel& kernel,
                 const EnergyFunction& energy, const std::vector<double>& snapshot_times = {});

}  // namespace korteweg
