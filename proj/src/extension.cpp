#include "korteweg/extension.hpp"

#include <cmath>
#include <sstream>

#include "korteweg/error.hpp"

namespace korteweg {
namespace {

void require_grid(const CellField& f, const DomainMask& mask) {
  if (!(f.grid() == mask.grid())) throw PreconditionError("field and mask live on different grids");
}

}  // namespace

std::string ExtendedField::provenance() const {
  std::ostringstream out;
  out.precision(17);
  out << "extension=" << (kind == ExtensionKind::zero ? "zero" : "mean_value") << " eps=" << eps
      << " cell=" << (cell_fingerprint.empty() ? "none" : cell_fingerprint);
  return out.str();
}

CellField restrict_to_fluid(const CellField& f, const DomainMask& mask) {
  require_grid(f, mask);
  CellField out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = mask.fluid(k) ? f[k] : 0.0;
  return out;
}

ExtendedField zero_extend(const CellField& f, const DomainMask& mask) {
  return {restrict_to_fluid(f, mask), ExtensionKind::zero, mask.eps(),
          mask.has_cell() ? mask.cell().fingerprint() : std::string()};
}

ExtendedField mean_value_extend(const CellField& f, const DomainMask& mask) {
  require_grid(f, mask);
  const std::size_t ncopies = mask.copies().size();
  std::vector<KahanSum> sums(ncopies);
  std::vector<std::size_t> counts(ncopies, 0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const int c = mask.copy_of(k);
    if (c >= 0 && mask.annulus(k)) {
      sums[c].add(f[k]);
      ++counts[c];
    }
  }
  ExtendedField out{restrict_to_fluid(f, mask), ExtensionKind::mean_value, mask.eps(),
                    mask.has_cell() ? mask.cell().fingerprint() : std::string()};
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (mask.fluid(k)) continue;
    const int c = mask.copy_of(k);
    if (c < 0) throw PreconditionError("solid cell outside every interior copy");
    if (counts[c] == 0) throw ConfigError("annulus contains no grid cells; refine the grid");
    out.values[k] = sums[c].value() / static_cast<double>(counts[c]);
  }
  return out;
}

std::vector<TestFunction> default_test_functions(const Rect& omega) {
  const double cx = 0.5 * (omega.x0 + omega.x1), cy = 0.5 * (omega.y0 + omega.y1);
  const double w = 0.2 * std::min(omega.width(), omega.height());
  return {
      {"1", [](double, double) { return 1.0; }},
      {"x", [](double x, double) { return x; }},
      {"y", [](double, double y) { return y; }},
      {"x^2", [](double x, double) { return x * x; }},
      {"xy", [](double x, double y) { return x * y; }},
      {"gaussian",
       [cx, cy, w](double x, double y) {
         const double dx = x - cx, dy = y - cy;
         return std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
       }},
  };
}

double integrate(const CellField& f, const TestFunction& psi) {
  const auto& g = f.grid();
  KahanSum s;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) s.add(f(i, j) * psi.psi(g.xc(i), g.yc(j)));
  return g.cell_area() * s.value();
}

bool strictly_decreasing(const std::vector<double>& errors, double floor) {
  for (std::size_t k = 1; k < errors.size(); ++k) {
    if (errors[k] <= floor) continue;
    if (!(errors[k] < errors[k - 1])) return false;
  }
  return true;
}

bool WeakLimitReport::all_coupled() const {
  for (const auto& s : series)
    if (!s.coupled()) return false;
  return true;
}

bool WeakLimitReport::all_converging() const {
  for (const auto& s : series)
    if (!(s.a_decreasing && s.b_decreasing)) return false;
  return true;
}

WeakLimitReport weak_limit_check(const std::vector<std::pair<const DomainMask*, CellField>>& family,
                                 const CellField& g, double theta, const std::vector<TestFunction>& tests) {
  for (const auto& [mask, field] : family) {
    if (!(mask->grid() == g.grid()) || !(field.grid() == g.grid()))
      throw PreconditionError("weak-limit check needs a common grid for all extensions");
  }
  WeakLimitReport rep;
  for (const auto& psi : tests) {
    WeakLimitSeries series;
    series.test_function = psi.name;
    const double ref = integrate(g, psi);
    std::vector<double> ea, eb;
    for (const auto& [mask, field] : family) {
      WeakLimitEntry e;
      e.eps = mask->eps();
      e.a = integrate(mean_value_extend(field, *mask).values, psi);
      e.b = integrate(zero_extend(field, *mask).values, psi);
      e.a_error = std::abs(e.a - ref);
      e.b_error = std::abs(e.b - theta * ref);
      ea.push_back(e.a_error);
      eb.push_back(e.b_error);
      series.entries.push_back(e);
    }
    const double floor = 1e-13 * std::max(1.0, std::abs(ref));
    series.a_decreasing = strictly_decreasing(ea, floor);
    series.b_decreasing = strictly_decreasing(eb, floor);
    rep.series.push_back(std::move(series));
  }
  return rep;
}

}  // namespace korteweg
