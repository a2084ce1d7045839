#pragma once

#include <array>
#include <memory>
#include <vector>

#include "korteweg/geometry.hpp"
#include "korteweg/grid.hpp"
#include "korteweg/simd/stencil.hpp"

namespace korteweg {

/// Smooth bump phi(x) = C exp(-1 / (1 - |x/delta|^2)) on |x| < delta, with C
/// fixed so that the grid quadrature h^2 sum phi_h equals 1.
class Kernel {
 public:
  /// Throws ConfigError when delta < 2h.
  static Kernel make(double delta, double h);

  double delta() const { return delta_; }
  double h() const { return h_; }
  /// Stencil half-width s = ceil(delta / h).
  int radius() const { return s_; }
  int width() const { return 2 * s_ + 1; }
  double normalization() const { return c_; }

  double phi(double x, double y) const;
  std::array<double, 2> grad_phi(double x, double y) const;

  /// h^2 phi(a h, b h), indexed (b + s) * width + (a + s). Symmetric, so it
  /// is also the correlation stencil of the convolution.
  const std::vector<double>& weights() const { return w_; }
  /// Correlation stencils of the gradient: h^2 d_x phi(-a h, -b h) and
  /// h^2 d_y phi(-a h, -b h), so that correlating a field with them yields
  /// grad(phi * f).
  const std::vector<double>& grad_x_weights() const { return gx_; }
  const std::vector<double>& grad_y_weights() const { return gy_; }

  simd::Stencil stencil() const { return {w_.data(), s_}; }
  simd::Stencil grad_x_stencil() const { return {gx_.data(), s_}; }
  simd::Stencil grad_y_stencil() const { return {gy_.data(), s_}; }

  /// max |grad phi_h| over the stencil (Euclidean norm).
  double grad_sup() const { return grad_sup_; }
  /// h^2 sum |grad phi_h|.
  double grad_l1() const { return grad_l1_; }

 private:
  double delta_ = 0.0;
  double h_ = 0.0;
  int s_ = 0;
  double c_ = 0.0;
  double grad_sup_ = 0.0;
  double grad_l1_ = 0.0;
  std::vector<double> w_, gx_, gy_;
};

/// (f - shift) on fluid cells, 0 on solid cells and on a border of `pad`
/// cells around the grid.
class PaddedField {
 public:
  PaddedField(const GridSpec& grid, int pad, double fill = 0.0);
  static PaddedField shifted_fluid(const CellField& f, const DomainMask& mask, double shift, int pad);
  /// 1 on solid cells and outside the grid, 0 on fluid cells.
  static PaddedField non_fluid_indicator(const DomainMask& mask, int pad);
  /// 1 on fluid cells, 0 on solid cells and outside the grid.
  static PaddedField fluid_indicator(const DomainMask& mask, int pad);

  double& at(int i, int j) { return data_[static_cast<std::size_t>(j + pad_) * pitch_ + i + pad_]; }
  double at(int i, int j) const { return data_[static_cast<std::size_t>(j + pad_) * pitch_ + i + pad_]; }
  simd::PaddedView view() const { return {data_.data(), pitch_, pad_}; }

 private:
  int nx_, ny_, pad_, pitch_;
  std::vector<double> data_;
};

/// Correlates the padded input with a stencil over the grid of `grid`.
CellField apply_stencil(const PaddedField& in, const GridSpec& grid, simd::Stencil st);

/// phi *_X rho = int_X phi(x-y) rho(y) dy + rho_s int_{R^2 \ X} phi(x-y) dy,
/// evaluated as rho_s + phi * [(rho - rho_s) 1_X]. Returned on every cell of
/// the grid; only fluid values enter the model.
CellField convolve_wall(const CellField& rho, const DomainMask& mask, const Kernel& kernel, double rho_s);

/// D_X[rho] = phi *_X rho - rho on fluid cells, 0 on solid cells.
CellField capillarity(const CellField& rho, const DomainMask& mask, const Kernel& kernel, double rho_s);

struct VectorField {
  CellField x;
  CellField y;
};

/// Cell-centered grad(phi *_X rho) from the sampled analytic gradient of phi.
VectorField grad_convolution(const CellField& rho, const DomainMask& mask, const Kernel& kernel, double rho_s);

/// Mass of phi over the complement of the fluid region seen from each cell:
/// sum over non-fluid y (solid or outside Omega) of h^2 phi(x - y).
CellField exterior_mass(const DomainMask& mask, const Kernel& kernel);

struct HomogenizedRow {
  double eps = 0.0;
  double error = 0.0;
  double theta = 0.0;
};

/// For each eps: || grad(phi *_eps f) - theta grad(phi *_0 f) ||_{L2(Omega)},
/// where phi *_eps integrates over Omega_eps and phi *_0 over Omega. A null
/// cell means no grain (theta = 1, Omega_eps = Omega). f lives on the
/// kernel-spacing grid of Omega.
std::vector<HomogenizedRow> homogenized_convergence_check(const CellField& f,
                                                          std::shared_ptr<const UnitCell> cell,
                                                          const Rect& omega, const std::vector<double>& eps_list,
                                                          const Kernel& kernel, double rho_s);

}  // namespace korteweg
