#pragma once

#include "korteweg/constitutive.hpp"
#include "korteweg/geometry.hpp"
#include "korteweg/nonlocal.hpp"

namespace korteweg {

struct FreeEnergy {
  double fluid_fluid = 0.0;
  double fluid_solid = 0.0;
  double bulk = 0.0;
  double total() const { return fluid_fluid + fluid_solid + bulk; }
};

/// Midpoint quadrature of
///   (gamma w / 4) sum_{x,y in X} phi (rho(x) - rho(y))^2
/// + (gamma w / 2) sum_{x in X, y not in X} phi (rho(x) - rho_s)^2
/// + w sum_{x in X} W(rho(x)),
/// with X the fluid cells of the mask. Caches the exterior kernel mass so a
/// time loop pays only for the pair sum.
class FreeEnergyEvaluator {
 public:
  FreeEnergyEvaluator(const DomainMask& mask, const Kernel& kernel, const EnergyFunction& energy, double omega);

  /// Throws PreconditionError when rho < 0 on a fluid cell.
  FreeEnergy operator()(const CellField& rho) const;

  const CellField& exterior() const { return exterior_; }

 private:
  const DomainMask* mask_;
  const Kernel* kernel_;
  const EnergyFunction* energy_;
  double omega_;
  CellField exterior_;
  PaddedField fluid_;
};

FreeEnergy free_energy(const CellField& rho, const DomainMask& mask, const Kernel& kernel,
                       const EnergyFunction& energy, double omega);

}  // namespace korteweg
