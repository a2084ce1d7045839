#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "korteweg/cell_problem.hpp"
#include "korteweg/constitutive.hpp"
#include "korteweg/effective_solver.hpp"
#include "korteweg/extension.hpp"
#include "korteweg/geometry.hpp"
#include "korteweg/pore_solver.hpp"

namespace korteweg {

/// Initial density on Omega, evaluated at cell centres.
struct InitialDatum {
  enum class Kind { constant, gaussian, modes, noise };
  struct Mode {
    int kx = 1;
    int ky = 0;
    double amplitude = 0.0;
  };

  Kind kind = Kind::constant;
  double base = 1.0;
  double amplitude = 0.0;
  std::array<double, 2> center{0.5, 0.5};
  double width = 0.1;
  /// base + sum amplitude cos(kx pi (x - x0) / W) cos(ky pi (y - y0) / H);
  /// every mode has zero normal derivative on the boundary.
  std::vector<Mode> modes;
  std::uint64_t seed = 1;
  int smoothing = 2;  ///< passes of a 5-point average applied to the noise

  CellField evaluate(const GridSpec& grid, const Rect& omega) const;
};

struct StudyConfig {
  std::shared_ptr<const UnitCell> cell;
  Rect omega;
  std::vector<double> eps;  ///< strictly decreasing
  double h = 0.0;           ///< common grid spacing of every run
  PressureLaw law;
  EnergyFunction energy;
  double delta = 0.1;
  PoreConfig pore;            ///< eps and T are set per run
  EffectiveConfig effective;  ///< theta and A replaced by the cell results unless given
  bool effective_coefficients_given = false;
  CellSolveOptions cell_options;
  InitialDatum initial;
  std::optional<double> T;     ///< chosen by an effective dry run when absent
  int n_times = 4;             ///< comparison times t_j = j T / n_times
  double rho_floor_factor = 1e-3;
  double dry_run_change = 0.05;
  int threads = 1;
};

struct AprioriRow {
  double eps = 0.0;
  double u_over_eps2_l2l2 = 0.0;   ///< || u / eps^2 ||_{L2(L2)}
  double u_over_eps_l2h1 = 0.0;    ///< || u / eps ||_{L2(H1)}
  double sup_w_integral = 0.0;     ///< sup_t int W(rho)
  double sup_rho_l2 = 0.0;         ///< sup_t || rho ||_{L2}
  double mass_variation = 0.0;     ///< max_t |m(t) - m(0)| / m(0)
};

struct PoincareRow {
  double eps = 0.0;
  double max_ratio = 0.0;  ///< max over snapshots of ||u|| / (eps ||Du||)
  double min_ratio = 0.0;
  int used = 0;
  int skipped = 0;         ///< snapshots with u = 0
};

struct StudyRow {
  double eps = 0.0;
  double e_rho = 0.0;
  std::vector<double> e_rho_at;      ///< ||rho_hat - rho_CH||_{L2} at each t_j
  double darcy_residual = 0.0;       ///< time-L2 aggregate of the weak residuals
  std::vector<double> darcy_at;      ///< weak residual at each t_j
  AprioriRow apriori;
  PoincareRow poincare;
  int steps = 0;
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::vector<StudyRow> rows;
  std::vector<double> times;
  double T = 0.0;
  double theta = 0.0;
  Matrix2 A{};
  int effective_steps = 0;
  double effective_seconds = 0.0;
  double cell_seconds = 0.0;
  bool complete = false;
  std::string failure;

  bool e_rho_decreasing() const;
  bool darcy_decreasing() const;
  bool apriori_uniform(double factor = 2.0) const;
  double poincare_spread() const;  ///< (max - min) / min over eps of max_ratio
};

/// Chooses T by doubling from `start` until the effective solution changes by
/// at least `change` in relative L2 norm (capped at `t_max`).
double choose_final_time(const CellField& rho0, const EffectiveConfig& cfg, const DomainMask& omega,
                         const Kernel& kernel, const PressureLaw& law, double change, double start = 0.05,
                         double t_max = 64.0);

/// Weak Darcy residual max over psi and components of
/// | int (u_pore / eps^2 - u_D) psi |, with u_D zeroed where the face density
/// of rho_CH is at most rho_floor.
double darcy_residual(const PoreSnapshot& pore, const EffectiveSnapshot& effective, double eps,
                      const std::vector<TestFunction>& tests, double rho_floor);

AprioriRow apriori_row(double eps, const PoreRun& run);
PoincareRow poincare_row(double eps, const PoreRun& run);

/// Whole experiment: cell problem, effective run, one pore run per eps,
/// extensions and error tables. Sub-run failures leave complete = false and
/// the message in failure.
ConvergenceReport convergence_study(const StudyConfig& cfg);

}  // namespace korteweg
