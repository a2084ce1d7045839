#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "korteweg/geometry.hpp"
#include "korteweg/grid.hpp"

namespace korteweg {

enum class ExtensionKind { zero, mean_value };

struct ExtendedField {
  CellField values;
  ExtensionKind kind = ExtensionKind::zero;
  double eps = 0.0;
  std::string cell_fingerprint;

  /// One-line provenance written as the FIELD comment line.
  std::string provenance() const;
};

/// f on fluid cells, 0 on solid cells.
ExtendedField zero_extend(const CellField& f, const DomainMask& mask);

/// f on fluid cells; on the grain of each interior copy, the mean of f over
/// that copy's annulus cells. Throws ConfigError if an annulus has no cells.
ExtendedField mean_value_extend(const CellField& f, const DomainMask& mask);

/// Copy of f with solid cells set to 0.
CellField restrict_to_fluid(const CellField& f, const DomainMask& mask);

struct TestFunction {
  std::string name;
  std::function<double(double, double)> psi;
};

/// 1, x, y, x^2, xy and a Gaussian centred in Omega.
std::vector<TestFunction> default_test_functions(const Rect& omega);

/// h^2 sum f(x_c) psi(x_c) over all cells.
double integrate(const CellField& f, const TestFunction& psi);

struct WeakLimitEntry {
  double eps = 0.0;
  double a = 0.0;        ///< int hat g_eps psi
  double b = 0.0;        ///< int tilde g_eps psi
  double a_error = 0.0;  ///< |a - int g psi|
  double b_error = 0.0;  ///< |b - theta int g psi|
};

struct WeakLimitSeries {
  std::string test_function;
  std::vector<WeakLimitEntry> entries;
  bool a_decreasing = false;
  bool b_decreasing = false;
  /// Both error columns decrease, or neither does.
  bool coupled() const { return a_decreasing == b_decreasing; }
};

struct WeakLimitReport {
  std::vector<WeakLimitSeries> series;
  bool all_coupled() const;
  bool all_converging() const;
};

/// Errors shrinking along the list; values below `floor` count as converged.
bool strictly_decreasing(const std::vector<double>& errors, double floor = 1e-13);

/// family: (mask, g_eps on the mask grid) for decreasing eps.
WeakLimitReport weak_limit_check(const std::vector<std::pair<const DomainMask*, CellField>>& family,
                                 const CellField& g, double theta, const std::vector<TestFunction>& tests);

}  // namespace korteweg
