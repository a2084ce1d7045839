#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace korteweg {

/// p(r) = coefficient * r^exponent, exponent >= 1.
struct PolytropicLaw {
  double coefficient = 1.0;
  double exponent = 2.0;
};

/// Two-well cubic p(r) = scale * ((2r - 1)^3 - shift (2r - 1) + 1 - shift);
/// decreasing on |2r - 1| < sqrt(shift / 3). scale = 0.8, shift = 0.5 is the
/// textbook liquid/vapour example.
struct CubicLaw {
  double scale = 0.8;
  double shift = 0.5;
};

/// p(r) = R T r / (b - r) - a r^2, only usable on [0, r_max] with r_max < b.
struct VanDerWaalsLaw {
  double a = 1.0;
  double b = 1.0;
  double R = 1.0;
  double T = 0.2;
};

using PressureFamily = std::variant<PolytropicLaw, CubicLaw, VanDerWaalsLaw>;

/// Leading behaviour of the generalized pressure: P'(r) / r^(beta-1) -> c.
struct PressureTail {
  double beta = 2.0;
  double c = 1.0;
};

/// Pressure law p together with the capillarity constant gamma. Derived
/// quantity: the generalized pressure P = p + gamma r^2 / 2. Evaluation is
/// restricted to the working range [0, r_max].
class PressureLaw {
 public:
  /// p(r) = r^2 without capillarity on [0, 10].
  PressureLaw() : PressureLaw(PolytropicLaw{}, 0.0, 1.0, 10.0) {}
  PressureLaw(PressureFamily family, double gamma, double rho_s, double r_max);

  double p(double r) const;
  double dp(double r) const;
  double d2p(double r) const;

  double P(double r) const { return p(r) + 0.5 * gamma_ * r * r; }
  double dP(double r) const { return dp(r) + gamma_ * r; }
  double d2P(double r) const { return d2p(r) + gamma_; }

  /// \int_a^b p(s) / s^2 ds in closed form.
  double p_over_s2_integral(double a, double b) const;
  /// True when p(s)/s^2 is integrable at s = 0.
  bool integrable_at_zero() const;

  double gamma() const { return gamma_; }
  double rho_s() const { return rho_s_; }
  double r_max() const { return r_max_; }
  const PressureFamily& family() const { return family_; }
  std::string name() const;

  /// Interval (alpha_1, alpha_2) on which p' < 0, if any.
  const std::optional<std::pair<double, double>>& spinodal() const { return spinodal_; }
  /// Symbolic tail of P for families with polynomial growth.
  std::optional<PressureTail> tail() const;

  /// Throws RangeError outside [0, r_max].
  void check_range(double r) const;

  PressureLaw with_gamma(double gamma) const { return PressureLaw(family_, gamma, rho_s_, r_max_); }

 private:
  PressureFamily family_;
  double gamma_;
  double rho_s_;
  double r_max_;
  std::optional<std::pair<double, double>> spinodal_;
};

/// Validates parameters and locates the spinodal interval.
PressureLaw make_pressure(const PressureFamily& family, double gamma, double rho_s, double r_max);

struct AdmissibilityItem {
  std::string item;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string note;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityItem> items;
  double alpha = 0.0;         ///< min over the samples of P' and P''
  double sup_ratio = 0.0;     ///< sup of P P'' / (P')^2
  double tail_dP = 0.0;       ///< P'(r_max) / r_max^(beta-1)
  double tail_P = 0.0;        ///< beta P(r_max) / r_max^beta
  double slope_beta = 0.0;    ///< 1 + r P''/P' at r_max (measured growth exponent)
  std::optional<PressureTail> tail;
  double r_max = 0.0;
  int samples = 0;
  bool admissible = false;
  /// "verified on range" or "not admissible"; a sampled check is never a proof.
  std::string verdict;

  const AdmissibilityItem* find(const std::string& name) const;
};

/// Samples items 1-5 of the admissibility definition on [0, r_max].
/// alpha_required, when given, is the constant the caller wants confirmed;
/// otherwise any positive alpha passes item 3.
AdmissibilityReport check_admissibility(const PressureLaw& law, double r_max, int n_samples,
                                        std::optional<double> alpha_required = std::nullopt,
                                        double tail_tolerance = 0.05);

/// Bulk free-energy density W with p' = r W'' and p = r W' - W:
///   W(r) = r * (\int_{rho_ref}^r p(s)/s^2 ds + c_lin).
class EnergyFunction {
 public:
  EnergyFunction() : EnergyFunction(PressureLaw(), 1.0, 0.0, 0.0) {}
  EnergyFunction(const PressureLaw& law, double rho_ref, double rho_min, double c_lin);

  double W(double r) const;
  double dW(double r) const;
  double d2W(double r) const;
  /// Generalized chemical potential W'(r) + gamma r; G' = P'/r.
  double G(double r) const { return dW(r) + law_.gamma() * r; }

  double rho_ref() const { return rho_ref_; }
  double rho_min() const { return rho_min_; }
  double c_lin() const { return c_lin_; }
  const PressureLaw& law() const { return law_; }

  EnergyFunction with_c_lin(double c) const { return EnergyFunction(law_, rho_ref_, rho_min_, c); }

 private:
  PressureLaw law_;
  double rho_ref_;
  double rho_min_;
  double c_lin_;
};

/// Builds W for a law. The linear gauge is fixed so that
///  - single-well laws: W >= 0 on [rho_min, r_max] with W(rho_min) = 0;
///  - laws with a spinodal: W'((alpha_1 + alpha_2)/2) = 0, which makes W a
///    double well with its barrier at the spinodal midpoint.
/// rho_min defaults to 0 when p(s)/s^2 is integrable at 0 and to 1e-6 rho_ref
/// otherwise.
EnergyFunction energy_function(const PressureLaw& law, double rho_ref,
                               std::optional<double> rho_min = std::nullopt);

/// W(r_max) / P(r_max); tends to 1/(beta - 1) for tails with beta > 2.
double energy_pressure_ratio(const PressureLaw& law, const EnergyFunction& energy, double r_max);

}  // namespace korteweg
