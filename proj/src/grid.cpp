#include "korteweg/grid.hpp"

#include <algorithm>
#include <cmath>

namespace korteweg {

double stable_sum(std::span<const double> values) {
  KahanSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace korteweg
