#include "korteweg/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "korteweg/error.hpp"

namespace korteweg {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Cubic p = c1 r + c2 r^2 + c3 r^3.
struct CubicCoefficients {
  double c1, c2, c3;
};

CubicCoefficients coefficients(const CubicLaw& law) {
  return {law.scale * (6.0 - 2.0 * law.shift), -12.0 * law.scale, 8.0 * law.scale};
}

double refine_root(const std::function<double(double)>& f, double lo, double hi) {
  boost::uintmax_t max_iter = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto bracket = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, max_iter);
  return 0.5 * (bracket.first + bracket.second);
}

std::optional<std::pair<double, double>> locate_spinodal(const PressureLaw& law) {
  if (std::holds_alternative<PolytropicLaw>(law.family())) return std::nullopt;
  constexpr int kSamples = 4096;
  const double r_max = law.r_max();
  auto dp = [&](double r) { return law.dp(r); };
  std::optional<double> lower;
  double prev_r = 0.0;
  double prev = dp(0.0);
  for (int k = 1; k <= kSamples; ++k) {
    const double r = r_max * k / kSamples;
    const double cur = dp(r);
    if (!lower && prev > 0.0 && cur < 0.0) {
      lower = refine_root(dp, prev_r, r);
    } else if (lower && prev < 0.0 && cur > 0.0) {
      return std::make_pair(*lower, refine_root(dp, prev_r, r));
    }
    prev_r = r;
    prev = cur;
  }
  if (lower) return std::make_pair(*lower, r_max);
  return std::nullopt;
}

}  // namespace

PressureLaw::PressureLaw(PressureFamily family, double gamma, double rho_s, double r_max)
    : family_(std::move(family)), gamma_(gamma), rho_s_(rho_s), r_max_(r_max) {
  spinodal_ = locate_spinodal(*this);
}

double PressureLaw::p(double r) const {
  return std::visit(
      Overloaded{
          [&](const PolytropicLaw& l) { return l.coefficient * std::pow(r, l.exponent); },
          [&](const CubicLaw& l) {
            const auto c = coefficients(l);
            return r * (c.c1 + r * (c.c2 + r * c.c3));
          },
          [&](const VanDerWaalsLaw& l) { return l.R * l.T * r / (l.b - r) - l.a * r * r; },
      },
      family_);
}

double PressureLaw::dp(double r) const {
  return std::visit(
      Overloaded{
          [&](const PolytropicLaw& l) {
            if (l.exponent == 1.0) return l.coefficient;
            return l.coefficient * l.exponent * std::pow(r, l.exponent - 1.0);
          },
          [&](const CubicLaw& l) {
            const auto c = coefficients(l);
            return c.c1 + r * (2.0 * c.c2 + 3.0 * c.c3 * r);
          },
          [&](const VanDerWaalsLaw& l) {
            const double d = l.b - r;
            return l.R * l.T * l.b / (d * d) - 2.0 * l.a * r;
          },
      },
      family_);
}

double PressureLaw::d2p(double r) const {
  return std::visit(
      Overloaded{
          [&](const PolytropicLaw& l) {
            if (l.exponent == 1.0) return 0.0;
            if (l.exponent == 2.0) return 2.0 * l.coefficient;
            return l.coefficient * l.exponent * (l.exponent - 1.0) * std::pow(r, l.exponent - 2.0);
          },
          [&](const CubicLaw& l) {
            const auto c = coefficients(l);
            return 2.0 * c.c2 + 6.0 * c.c3 * r;
          },
          [&](const VanDerWaalsLaw& l) {
            const double d = l.b - r;
            return 2.0 * l.R * l.T * l.b / (d * d * d) - 2.0 * l.a;
          },
      },
      family_);
}

double PressureLaw::p_over_s2_integral(double a, double b) const {
  return std::visit(
      Overloaded{
          [&](const PolytropicLaw& l) {
            if (l.exponent == 1.0) return l.coefficient * std::log(b / a);
            const double q = l.exponent - 1.0;
            return l.coefficient * (std::pow(b, q) - std::pow(a, q)) / q;
          },
          [&](const CubicLaw& l) {
            const auto c = coefficients(l);
            return c.c1 * std::log(b / a) + c.c2 * (b - a) + 0.5 * c.c3 * (b * b - a * a);
          },
          [&](const VanDerWaalsLaw& l) {
            // p/s^2 = RT/(s (b - s)) - a
            const double rt = l.R * l.T;
            auto primitive = [&](double s) { return rt / l.b * std::log(s / (l.b - s)) - l.a * s; };
            return primitive(b) - primitive(a);
          },
      },
      family_);
}

bool PressureLaw::integrable_at_zero() const {
  if (const auto* poly = std::get_if<PolytropicLaw>(&family_)) return poly->exponent > 1.0;
  return false;
}

std::string PressureLaw::name() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const PolytropicLaw& l) {
                   out << "polytropic(coefficient=" << l.coefficient << ",exponent=" << l.exponent << ")";
                 },
                 [&](const CubicLaw& l) { out << "cubic(scale=" << l.scale << ",shift=" << l.shift << ")"; },
                 [&](const VanDerWaalsLaw& l) {
                   out << "vdw(a=" << l.a << ",b=" << l.b << ",R=" << l.R << ",T=" << l.T << ")";
                 },
             },
             family_);
  out << ",gamma=" << gamma_;
  return out.str();
}

std::optional<PressureTail> PressureLaw::tail() const {
  return std::visit(
      Overloaded{
          [&](const PolytropicLaw& l) -> std::optional<PressureTail> {
            if (l.exponent > 2.0) return PressureTail{l.exponent, l.coefficient * l.exponent};
            if (l.exponent == 2.0) return PressureTail{2.0, 2.0 * l.coefficient + gamma_};
            if (gamma_ > 0.0) return PressureTail{2.0, gamma_};
            return PressureTail{l.exponent, l.coefficient * l.exponent};
          },
          [&](const CubicLaw& l) -> std::optional<PressureTail> {
            return PressureTail{3.0, 3.0 * coefficients(l).c3};
          },
          [&](const VanDerWaalsLaw&) -> std::optional<PressureTail> { return std::nullopt; },
      },
      family_);
}

void PressureLaw::check_range(double r) const {
  if (!(r >= 0.0) || r > r_max_ * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "density " << r << " outside the working range [0, " << r_max_ << "]";
    throw RangeError(msg.str());
  }
}

PressureLaw make_pressure(const PressureFamily& family, double gamma, double rho_s, double r_max) {
  if (!(gamma >= 0.0)) throw ConfigError("capillarity constant gamma must be >= 0");
  if (!(rho_s > 0.0)) throw ConfigError("wall density rho_s must be > 0");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ConfigError("r_max must be positive and finite");
  std::visit(Overloaded{
                 [](const PolytropicLaw& l) {
                   if (!(l.coefficient > 0.0)) throw ConfigError("polytropic coefficient must be > 0");
                   if (!(l.exponent >= 1.0)) throw ConfigError("polytropic exponent must be >= 1");
                 },
                 [](const CubicLaw& l) {
                   if (!(l.scale > 0.0)) throw ConfigError("cubic scale must be > 0");
                   // p(r) = scale r (8r^2 - 12r + 6 - 2 shift) stays positive iff shift < 3/4
                   if (!(l.shift >= 0.0 && l.shift < 0.75))
                     throw ConfigError("cubic shift must lie in [0, 0.75) so that p >= 0");
                 },
                 [&](const VanDerWaalsLaw& l) {
                   if (!(l.a >= 0.0 && l.b > 0.0 && l.R > 0.0 && l.T > 0.0))
                     throw ConfigError("van der Waals parameters must be positive");
                   if (r_max >= l.b)
                     throw RangeError("van der Waals density range must stay strictly below b");
                 },
             },
             family);
  return PressureLaw(family, gamma, rho_s, r_max);
}

const AdmissibilityItem* AdmissibilityReport::find(const std::string& name) const {
  for (const auto& it : items)
    if (it.item == name) return &it;
  return nullptr;
}

AdmissibilityReport check_admissibility(const PressureLaw& law, double r_max, int n_samples,
                                        std::optional<double> alpha_required, double tail_tolerance) {
  if (!(r_max > 0.0)) throw PreconditionError("r_max must be > 0");
  if (n_samples < 100) throw PreconditionError("n_samples must be >= 100");
  if (r_max > law.r_max() * (1.0 + 1e-12)) law.check_range(r_max);

  AdmissibilityReport rep;
  rep.r_max = r_max;
  rep.samples = n_samples;
  int non_finite = 0;
  double min_dP = std::numeric_limits<double>::infinity();
  double min_d2P = std::numeric_limits<double>::infinity();
  double sup_ratio = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double r = r_max * k / (n_samples - 1);
    const double P = law.P(r), dP = law.dP(r), d2P = law.d2P(r);
    if (!std::isfinite(P) || !std::isfinite(dP) || !std::isfinite(d2P)) {
      ++non_finite;
      continue;
    }
    min_dP = std::min(min_dP, dP);
    min_d2P = std::min(min_d2P, d2P);
    if (dP > 0.0) sup_ratio = std::max(sup_ratio, P * d2P / (dP * dP));
  }
  rep.alpha = std::min(min_dP, min_d2P);
  rep.sup_ratio = sup_ratio;

  const double alpha_bound = alpha_required.value_or(0.0);
  auto alpha_ok = [&](double measured) {
    return measured > 0.0 && measured >= alpha_bound * (1.0 - 1e-12);
  };
  rep.items.push_back({"1 C2 on range", static_cast<double>(non_finite), 0.0, non_finite == 0,
                       "count of samples with non-finite P, P' or P''"});
  const double p0 = std::abs(law.P(0.0));
  rep.items.push_back({"2 P(0)=0", p0, 0.0, p0 == 0.0, ""});
  rep.items.push_back({"3 P'>=alpha", min_dP, alpha_bound, alpha_ok(min_dP), "minimum over samples"});
  rep.items.push_back({"3 P''>=alpha", min_d2P, alpha_bound, alpha_ok(min_d2P), "minimum over samples"});
  rep.items.push_back({"4 P*P''/P'^2<=2", sup_ratio, 2.0, sup_ratio <= 2.0, "supremum over samples"});

  rep.tail = law.tail();
  const double dP_end = law.dP(r_max);
  rep.slope_beta = 1.0 + r_max * law.d2P(r_max) / dP_end;
  if (rep.tail) {
    const double beta = rep.tail->beta, c = rep.tail->c;
    rep.tail_dP = dP_end / std::pow(r_max, beta - 1.0);
    rep.tail_P = beta * law.P(r_max) / std::pow(r_max, beta);
    rep.items.push_back({"5 beta>=2", beta, 2.0, beta >= 2.0, "symbolic tail exponent"});
    rep.items.push_back({"5 P'/r^(beta-1)->c", rep.tail_dP, c,
                         std::abs(rep.tail_dP - c) <= tail_tolerance * c, "value at r_max"});
    rep.items.push_back({"5 beta*P/r^beta->c", rep.tail_P, c,
                         std::abs(rep.tail_P - c) <= tail_tolerance * c, "value at r_max"});
  } else {
    rep.items.push_back({"5 beta>=2", rep.slope_beta, 2.0, false,
                         "law is defined on a capped range only; no growth tail"});
  }
  rep.items.push_back({"5 measured exponent", rep.slope_beta, rep.tail ? rep.tail->beta : 0.0, true,
                       "1 + r P''/P' at r_max, informational"});

  rep.admissible = std::all_of(rep.items.begin(), rep.items.end(), [](const auto& it) { return it.pass; });
  rep.verdict = rep.admissible ? "verified on range" : "not admissible";
  return rep;
}

EnergyFunction::EnergyFunction(const PressureLaw& law, double rho_ref, double rho_min, double c_lin)
    : law_(law), rho_ref_(rho_ref), rho_min_(rho_min), c_lin_(c_lin) {}

double EnergyFunction::W(double r) const {
  law_.check_range(r);
  if (r == 0.0) return 0.0;
  return r * (law_.p_over_s2_integral(rho_ref_, r) + c_lin_);
}

double EnergyFunction::dW(double r) const {
  law_.check_range(r);
  if (r == 0.0) {
    if (!law_.integrable_at_zero()) throw RangeError("W' is unbounded at zero density for this law");
    return law_.p_over_s2_integral(rho_ref_, 0.0) + law_.dp(0.0) + c_lin_;
  }
  return law_.p_over_s2_integral(rho_ref_, r) + law_.p(r) / r + c_lin_;
}

double EnergyFunction::d2W(double r) const {
  law_.check_range(r);
  if (r == 0.0) throw RangeError("W'' is not defined at zero density");
  return law_.dp(r) / r;
}

EnergyFunction energy_function(const PressureLaw& law, double rho_ref, std::optional<double> rho_min) {
  if (!(rho_ref > 0.0)) throw ConfigError("reference density rho_ref must be > 0");
  law.check_range(rho_ref);
  const double lo = rho_min.value_or(law.integrable_at_zero() ? 0.0 : 1e-6 * rho_ref);
  if (!(lo >= 0.0) || lo >= law.r_max()) throw ConfigError("rho_min must lie in [0, r_max)");
  if (lo == 0.0 && !law.integrable_at_zero())
    throw ConfigError("p(s)/s^2 is not integrable at 0; choose rho_min > 0");

  double c_lin = 0.0;
  if (const auto& sp = law.spinodal()) {
    const double mid = 0.5 * (sp->first + sp->second);
    c_lin = -(law.p_over_s2_integral(rho_ref, mid) + law.p(mid) / mid);
  } else {
    c_lin = -law.p_over_s2_integral(rho_ref, lo);
  }
  return EnergyFunction(law, rho_ref, lo, c_lin);
}

double energy_pressure_ratio(const PressureLaw& law, const EnergyFunction& energy, double r_max) {
  const auto tail = law.tail();
  if (!tail) throw NotApplicable("energy/pressure ratio needs a polynomial growth tail");
  if (!(tail->beta > 2.0)) throw NotApplicable("energy/pressure ratio requires beta > 2");
  return energy.W(r_max) / law.P(r_max);
}

}  // namespace korteweg
