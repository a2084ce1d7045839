#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "korteweg/geometry.hpp"
#include "korteweg/grid.hpp"
#include "korteweg/nonlocal.hpp"

namespace korteweg::testing {

/// Seeded uniform doubles in [lo, hi); the generator behind every
/// property-style loop in the suite.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  CellField field(const GridSpec& g, double lo, double hi) {
    CellField f(g);
    for (auto& v : f.raw()) v = uniform(lo, hi);
    return f;
  }
  /// Sum of a few random low modes around `base`; strictly inside [base - amp, base + amp].
  CellField smooth_field(const GridSpec& g, double base, double amp) {
    CellField f(g, base);
    const int modes = 3;
    std::vector<std::array<double, 4>> m;
    for (int k = 0; k < modes; ++k)
      m.push_back({uniform(0.5, 2.5), uniform(0.5, 2.5), uniform(0.0, 6.3), uniform(-1.0, 1.0) * amp / modes});
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.xc(i), y = g.yc(j);
        for (const auto& q : m) f(i, j) += q[3] * std::sin(q[0] * 3.14159 * x + q[2]) * std::cos(q[1] * 3.14159 * y);
      }
    return f;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double max_rel_field_diff(const CellField& a, const CellField& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    scale = std::max(scale, std::abs(a[k]));
    diff = std::max(diff, std::abs(a[k] - b[k]));
  }
  return scale == 0.0 ? diff : diff / scale;
}

/// Literal wall convolution: sum over fluid lattice points y of
/// h^2 phi(x - y) rho(y) plus rho_s times the kernel mass over every lattice
/// point that is not fluid (solid or outside the grid).
inline double brute_wall_convolution(const CellField& rho, const DomainMask& mask, const Kernel& k, double rho_s,
                                     int i, int j) {
  const auto& g = mask.grid();
  const int reach = k.radius() + 1;
  double inside = 0.0, outside = 0.0;
  for (int jj = j - reach; jj <= j + reach; ++jj)
    for (int ii = i - reach; ii <= i + reach; ++ii) {
      const double w = g.h * g.h * k.phi((i - ii) * g.h, (j - jj) * g.h);
      const bool in_grid = ii >= 0 && jj >= 0 && ii < g.nx && jj < g.ny;
      if (in_grid && mask.fluid(ii, jj)) inside += w * rho(ii, jj);
      else outside += w;
    }
  return inside + rho_s * outside;
}

}  // namespace korteweg::testing
