#include "korteweg/free_energy.hpp"

#include "korteweg/error.hpp"

namespace korteweg {

FreeEnergyEvaluator::FreeEnergyEvaluator(const DomainMask& mask, const Kernel& kernel,
                                         const EnergyFunction& energy, double omega)
    : mask_(&mask),
      kernel_(&kernel),
      energy_(&energy),
      omega_(omega),
      exterior_(exterior_mass(mask, kernel)),
      fluid_(PaddedField::fluid_indicator(mask, kernel.radius())) {}

FreeEnergy FreeEnergyEvaluator::operator()(const CellField& rho) const {
  const auto& mask = *mask_;
  const auto& grid = mask.grid();
  if (!(rho.grid() == grid)) throw PreconditionError("density and mask live on different grids");
  for (std::size_t k = 0; k < rho.size(); ++k)
    if (mask.fluid(k) && !(rho[k] >= 0.0)) throw PreconditionError("negative density on a fluid cell");

  const double gamma = energy_->law().gamma();
  const double rho_s = energy_->law().rho_s();
  const double area = grid.cell_area();

  std::vector<double> pair(grid.cells(), 0.0);
  if (gamma != 0.0) {
    const auto g = PaddedField::shifted_fluid(rho, mask, 0.0, kernel_->radius());
    simd::pair_energy(g.view(), fluid_.view(), grid.nx, grid.ny, kernel_->stencil(), pair.data());
  }

  KahanSum ff, fs, bulk;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (!mask.fluid(k)) continue;
    ff.add(pair[k]);
    const double d = rho[k] - rho_s;
    fs.add(d * d * exterior_[k]);
    bulk.add(energy_->W(rho[k]));
  }
  FreeEnergy e;
  e.fluid_fluid = 0.25 * gamma * omega_ * area * ff.value();
  e.fluid_solid = 0.5 * gamma * omega_ * area * fs.value();
  e.bulk = omega_ * area * bulk.value();
  return e;
}

FreeEnergy free_energy(const CellField& rho, const DomainMask& mask, const Kernel& kernel,
                       const EnergyFunction& energy, double omega) {
  return FreeEnergyEvaluator(mask, kernel, energy, omega)(rho);
}

}  // namespace korteweg
