#include "korteweg/nonlocal.hpp"

#include <cmath>
#include <sstream>

#include "korteweg/error.hpp"

namespace korteweg {
namespace {

// Unnormalized bump and the factor g with grad = bump * g * x / delta^2.
double bump(double q2) { return q2 < 1.0 ? std::exp(-1.0 / (1.0 - q2)) : 0.0; }
double bump_grad_factor(double q2) {
  const double d = 1.0 - q2;
  return -2.0 / (d * d);
}

void require_same_grid(const CellField& f, const DomainMask& mask) {
  if (!(f.grid() == mask.grid())) throw PreconditionError("field and mask live on different grids");
}

}  // namespace

Kernel Kernel::make(double delta, double h) {
  if (!(h > 0.0) || !(delta > 0.0)) throw ConfigError("kernel support and grid spacing must be positive");
  if (delta < 2.0 * h * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "under-resolved kernel: support " << delta << " is below two grid cells (h = " << h << ")";
    throw ConfigError(msg.str());
  }
  Kernel k;
  k.delta_ = delta;
  k.h_ = h;
  k.s_ = static_cast<int>(std::ceil(delta / h - 1e-9));
  const int s = k.s_, width = 2 * s + 1;
  std::vector<double> raw(static_cast<std::size_t>(width) * width);
  double total = 0.0;
  for (int b = -s; b <= s; ++b) {
    for (int a = -s; a <= s; ++a) {
      const double x = a * h / delta, y = b * h / delta;
      raw[(b + s) * width + (a + s)] = bump(x * x + y * y);
    }
  }
  for (double v : raw) total += v;
  k.c_ = 1.0 / (h * h * total);

  k.w_.resize(raw.size());
  k.gx_.resize(raw.size());
  k.gy_.resize(raw.size());
  for (int b = -s; b <= s; ++b) {
    for (int a = -s; a <= s; ++a) {
      const std::size_t idx = (b + s) * width + (a + s);
      k.w_[idx] = h * h * k.c_ * raw[idx];
      const auto g = k.grad_phi(a * h, b * h);
      k.gx_[idx] = -h * h * g[0];
      k.gy_[idx] = -h * h * g[1];
      const double mag = std::hypot(g[0], g[1]);
      k.grad_sup_ = std::max(k.grad_sup_, mag);
      k.grad_l1_ += h * h * mag;
    }
  }
  return k;
}

double Kernel::phi(double x, double y) const {
  const double qx = x / delta_, qy = y / delta_;
  return c_ * bump(qx * qx + qy * qy);
}

std::array<double, 2> Kernel::grad_phi(double x, double y) const {
  const double qx = x / delta_, qy = y / delta_;
  const double q2 = qx * qx + qy * qy;
  if (q2 >= 1.0) return {0.0, 0.0};
  const double f = c_ * bump(q2) * bump_grad_factor(q2) / (delta_ * delta_);
  return {f * x, f * y};
}

PaddedField::PaddedField(const GridSpec& grid, int pad, double fill)
    : nx_(grid.nx), ny_(grid.ny), pad_(pad), pitch_(grid.nx + 2 * pad),
      data_(static_cast<std::size_t>(grid.nx + 2 * pad) * (grid.ny + 2 * pad), fill) {}

PaddedField PaddedField::shifted_fluid(const CellField& f, const DomainMask& mask, double shift, int pad) {
  require_same_grid(f, mask);
  const auto& g = mask.grid();
  PaddedField out(g, pad);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (mask.fluid(i, j)) out.at(i, j) = f(i, j) - shift;
  return out;
}

PaddedField PaddedField::non_fluid_indicator(const DomainMask& mask, int pad) {
  const auto& g = mask.grid();
  PaddedField out(g, pad, 1.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (mask.fluid(i, j)) out.at(i, j) = 0.0;
  return out;
}

PaddedField PaddedField::fluid_indicator(const DomainMask& mask, int pad) {
  const auto& g = mask.grid();
  PaddedField out(g, pad, 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (mask.fluid(i, j)) out.at(i, j) = 1.0;
  return out;
}

CellField apply_stencil(const PaddedField& in, const GridSpec& grid, simd::Stencil st) {
  CellField out(grid);
  simd::correlate(in.view(), grid.nx, grid.ny, st, out.raw().data());
  return out;
}

CellField convolve_wall(const CellField& rho, const DomainMask& mask, const Kernel& kernel, double rho_s) {
  const auto padded = PaddedField::shifted_fluid(rho, mask, rho_s, kernel.radius());
  CellField out = apply_stencil(padded, mask.grid(), kernel.stencil());
  for (auto& v : out.raw()) v += rho_s;
  return out;
}

CellField capillarity(const CellField& rho, const DomainMask& mask, const Kernel& kernel, double rho_s) {
  CellField out = convolve_wall(rho, mask, kernel, rho_s);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mask.fluid(k) ? out[k] - rho[k] : 0.0;
  return out;
}

VectorField grad_convolution(const CellField& rho, const DomainMask& mask, const Kernel& kernel, double rho_s) {
  const auto padded = PaddedField::shifted_fluid(rho, mask, rho_s, kernel.radius());
  return {apply_stencil(padded, mask.grid(), kernel.grad_x_stencil()),
          apply_stencil(padded, mask.grid(), kernel.grad_y_stencil())};
}

CellField exterior_mass(const DomainMask& mask, const Kernel& kernel) {
  const auto ind = PaddedField::non_fluid_indicator(mask, kernel.radius());
  return apply_stencil(ind, mask.grid(), kernel.stencil());
}

std::vector<HomogenizedRow> homogenized_convergence_check(const CellField& f,
                                                          std::shared_ptr<const UnitCell> cell,
                                                          const Rect& omega, const std::vector<double>& eps_list,
                                                          const Kernel& kernel, double rho_s) {
  for (std::size_t k = 1; k < eps_list.size(); ++k)
    if (!(eps_list[k] < eps_list[k - 1])) throw ConfigError("eps list must be strictly decreasing");
  const DomainMask full = unperforated(omega, kernel.h());
  require_same_grid(f, full);
  const auto grad0 = grad_convolution(f, full, kernel, rho_s);
  const double theta = cell ? cell->porosity() : 1.0;
  const double h2 = kernel.h() * kernel.h();

  std::vector<HomogenizedRow> rows;
  for (double eps : eps_list) {
    const DomainMask mask = cell ? DomainMask::build(cell, omega, eps, kernel.h()) : full;
    const auto grad = grad_convolution(f, mask, kernel, rho_s);
    KahanSum acc;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double dx = grad.x[k] - theta * grad0.x[k];
      const double dy = grad.y[k] - theta * grad0.y[k];
      acc.add(h2 * (dx * dx + dy * dy));
    }
    rows.push_back({eps, std::sqrt(acc.value()), theta});
  }
  return rows;
}

}  // namespace korteweg
