#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "korteweg/cell_problem.hpp"
#include "korteweg/constitutive.hpp"
#include "korteweg/effective_solver.hpp"
#include "korteweg/geometry.hpp"
#include "korteweg/pore_solver.hpp"
#include "korteweg/study.hpp"

namespace korteweg {

struct AdmissibilityOptions {
  double r_max = 100.0;
  int samples = 1000;
  std::optional<double> alpha;
  double tail_tolerance = 0.05;
};

/// Parsed run configuration. Every section is optional and falls back to the
/// documented defaults; unknown keys are rejected.
struct RunConfig {
  std::string canonical;  ///< key-sorted compact JSON of the whole file
  std::string hash;       ///< git blob id of `canonical`

  // geometry
  GrainShape grain = DiscGrain{};
  int m = 8;
  std::optional<double> annulus_radius;
  Rect omega{};
  std::vector<double> eps{0.25, 0.125, 0.0625};
  std::optional<double> h;
  CellSolveOptions cell;
  bool dump_cell_fields = false;

  // constitutive
  PressureFamily family = PolytropicLaw{};
  double gamma = 0.0;
  double rho_s = 1.0;
  double rho_ref = 1.0;
  std::optional<double> r_max;
  std::optional<double> rho_min;
  AdmissibilityOptions check;

  // kernel
  double delta = 0.1;

  PoreConfig pore;
  std::optional<double> pore_eps;

  EffectiveConfig effective;
  bool theta_given = false;
  bool A_given = false;
  std::optional<std::filesystem::path> A_csv;

  // study
  InitialDatum initial;
  std::optional<double> T;
  int n_times = 4;
  double rho_floor_factor = 1e-3;
  double dry_run_change = 0.05;
  int threads = 1;
  int snapshots = 0;  ///< FIELD snapshots written by pore / effective runs

  /// h if given, otherwise min(eps) / m.
  double grid_h() const;
  std::shared_ptr<const UnitCell> unit_cell() const;
  /// r_max if given, otherwise 10 max(rho0).
  double working_r_max(const CellField& rho0) const;
  PressureLaw pressure_law(double r_max) const;
  EnergyFunction energy(const PressureLaw& law) const;
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
/// Relative paths (A_csv) are resolved against base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

StudyConfig make_study_config(const RunConfig& cfg);

}  // namespace korteweg
