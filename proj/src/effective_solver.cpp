#include "korteweg/effective_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "korteweg/error.hpp"

namespace korteweg {
namespace {

double matrix_norm(const Matrix2& a) {
  return std::sqrt(a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1]);
}

// Face-normal forces -> transverse averages -> Darcy velocity and upwind flux.
EffectiveFlux assemble(const CellField& rho, const FaceField& force, const Matrix2& A, double mu) {
  const auto& g = rho.grid();
  const int nx = g.nx, ny = g.ny;
  EffectiveFlux out{FaceField(g, false), FaceField(g, false), force};
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const double fy = 0.25 * (force.y(i - 1, j) + force.y(i - 1, j + 1) + force.y(i, j) + force.y(i, j + 1));
      const double u = (A[0][0] * force.x(i, j) + A[0][1] * fy) / mu;
      out.u.x(i, j) = u;
      out.J.x(i, j) = (u >= 0.0 ? rho(i - 1, j) : rho(i, j)) * u;
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double fx = 0.25 * (force.x(i, j - 1) + force.x(i + 1, j - 1) + force.x(i, j) + force.x(i + 1, j));
      const double u = (A[1][0] * fx + A[1][1] * force.y(i, j)) / mu;
      out.u.y(i, j) = u;
      out.J.y(i, j) = (u >= 0.0 ? rho(i, j - 1) : rho(i, j)) * u;
    }
  return out;
}

void check_range(const CellField& rho, const PressureLaw& law) {
  for (double v : rho.raw()) law.check_range(v);
}

}  // namespace

void EffectiveConfig::validate() const {
  const bool theta_ok = (theta > 0.0 && theta < 1.0) || (theta == 1.0 && theta_override);
  if (!theta_ok) throw ConfigError("porosity theta must lie in (0, 1); theta = 1 needs the explicit override");
  if (!(mu > 0.0)) throw ConfigError("viscosity mu must be > 0");
  if (!(T > 0.0)) throw ConfigError("final time T must be > 0");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("CFL number must lie in (0, 1)");
  if (fixed_dt && !(*fixed_dt > 0.0)) throw ConfigError("fixed dt must be > 0");
  for (const auto& row : A)
    for (double v : row)
      if (!std::isfinite(v)) throw ConfigError("permeability entries must be finite");
}

EffectiveCoefficients effective_coefficients(double theta, double gamma) {
  return {gamma * theta, 0.5 * gamma * (1.0 - theta)};
}

EffectiveFlux effective_flux(const CellField& rho, const EffectiveConfig& cfg, const DomainMask& omega,
                             const Kernel& kernel, const PressureLaw& law) {
  if (!(rho.grid() == omega.grid())) throw PreconditionError("density and domain live on different grids");
  check_range(rho, law);
  const auto& g = rho.grid();
  const auto coef = effective_coefficients(cfg.theta, law.gamma());
  CellField c(g), q(g);
  if (coef.nonlocal != 0.0) {
    const CellField conv = convolve_wall(rho, omega, kernel, law.rho_s());
    for (std::size_t k = 0; k < rho.size(); ++k) c[k] = conv[k] - rho[k];
  }
  for (std::size_t k = 0; k < rho.size(); ++k) q[k] = law.p(rho[k]) + coef.quadratic * rho[k] * rho[k];
  const double ih = 1.0 / g.h;
  FaceField force(g, false);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const double rbar = 0.5 * (rho(i - 1, j) + rho(i, j));
      force.x(i, j) = coef.nonlocal * rbar * (c(i, j) - c(i - 1, j)) * ih - (q(i, j) - q(i - 1, j)) * ih;
    }
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double rbar = 0.5 * (rho(i, j - 1) + rho(i, j));
      force.y(i, j) = coef.nonlocal * rbar * (c(i, j) - c(i, j - 1)) * ih - (q(i, j) - q(i, j - 1)) * ih;
    }
  return assemble(rho, force, cfg.A, cfg.mu);
}

EffectiveFlux porous_medium_flux(const CellField& rho, const Matrix2& A, double mu, const PressureLaw& law) {
  check_range(rho, law);
  const auto& g = rho.grid();
  const double ih = 1.0 / g.h;
  FaceField force(g, false);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) force.x(i, j) = -(law.p(rho(i, j)) - law.p(rho(i - 1, j))) * ih;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) force.y(i, j) = -(law.p(rho(i, j)) - law.p(rho(i, j - 1))) * ih;
  return assemble(rho, force, A, mu);
}

double effective_dt_limit(const CellField& rho, const EffectiveFlux& flux, const EffectiveConfig& cfg,
                          const PressureLaw& law, double sigma) {
  const auto& g = rho.grid();
  const auto coef = effective_coefficients(cfg.theta, law.gamma());
  const double anorm = matrix_norm(cfg.A);
  double dmax = 0.0;
  for (double r : rho.raw()) {
    const double dq = law.dp(r) + 2.0 * coef.quadratic * r;
    dmax = std::max(dmax, r * anorm * (std::abs(dq) + 2.0 * coef.nonlocal * r) / cfg.mu);
  }
  double limit = dmax > 0.0 ? sigma * cfg.theta * g.h * g.h / (4.0 * dmax) : std::numeric_limits<double>::infinity();

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double out = std::max(flux.J.x(i + 1, j), 0.0) + std::max(-flux.J.x(i, j), 0.0) +
                         std::max(flux.J.y(i, j + 1), 0.0) + std::max(-flux.J.y(i, j), 0.0);
      if (out > 0.0) limit = std::min(limit, sigma * cfg.theta * g.h * std::max(rho(i, j), 0.0) / out);
    }
  return limit;
}

namespace {

CellField apply_divergence(const CellField& rho, const FaceField& J, double dt, double theta) {
  const auto& g = rho.grid();
  CellField next = rho;
  const double c = dt / (theta * g.h);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double div = (J.x(i + 1, j) - J.x(i, j)) + (J.y(i, j + 1) - J.y(i, j));
      double v = rho(i, j) - c * div;
      if (v < -1e-14) {
        std::ostringstream msg;
        msg << "negative density " << v << " in the effective update";
        throw SolverError(msg.str(), v);
      }
      next(i, j) = v < 0.0 ? 0.0 : v;
    }
  return next;
}

double theta_mass(const CellField& rho, double theta) {
  return theta * rho.grid().cell_area() * stable_sum(rho.values());
}

}  // namespace

EffectiveState step_effective(const EffectiveState& state, double dt, const EffectiveConfig& cfg,
                              const DomainMask& omega, const Kernel& kernel, const PressureLaw& law) {
  cfg.validate();
  if (!(dt >= 0.0)) throw PreconditionError("dt must be >= 0");
  const auto flux = effective_flux(state.rho, cfg, omega, kernel, law);
  const double limit = effective_dt_limit(state.rho, flux, cfg, law, 1.0);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "stability violation: dt = " << dt << " exceeds " << limit << "; shrink dt";
    throw SolverError(msg.str(), dt);
  }
  return {state.t + dt, apply_divergence(state.rho, flux.J, dt, cfg.theta), flux.J};
}

EffectiveRun run_effective(const CellField& rho0, const EffectiveConfig& cfg, const DomainMask& omega,
                           const Kernel& kernel, const PressureLaw& law, const std::vector<double>& snapshot_times,
                           const SnapshotStop& stop) {
  cfg.validate();
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
    throw ConfigError("snapshot times must be sorted");
  for (double v : rho0.raw())
    if (!(v >= 0.0)) throw PreconditionError("initial density must be >= 0");

  const double t_eps = 1e-12 * cfg.T;
  EffectiveRun run;
  CellField rho = rho0;
  double t = 0.0;
  std::size_t next_snap = 0;
  int step = 0;
  bool stopped = false;
  while (cfg.T - t > t_eps) {
    if (cfg.max_steps && step >= *cfg.max_steps) break;
    auto flux = effective_flux(rho, cfg, omega, kernel, law);
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= t + t_eps) {
      run.snapshots.push_back({t, rho, flux});
      ++next_snap;
      if (stop && stop(run.snapshots.back())) stopped = true;
    }
    if (stopped) {
      run.steps = step;
      run.final_state = {t, rho, flux.J};
      return run;
    }
    double dt;
    if (cfg.fixed_dt) {
      dt = *cfg.fixed_dt;
      if (dt > effective_dt_limit(rho, flux, cfg, law, 1.0)) {
        std::ostringstream msg;
        msg << "stability violation at t = " << t << ": fixed dt " << dt << " is too large";
        throw SolverError(msg.str(), dt);
      }
    } else {
      dt = effective_dt_limit(rho, flux, cfg, law, cfg.cfl);
    }
    dt = std::min(dt, cfg.T - t);
    if (next_snap < snapshot_times.size()) dt = std::min(dt, snapshot_times[next_snap] - t);
    if (dt < 1e-12 * cfg.T) {
      std::ostringstream msg;
      msg << "time step collapsed to " << dt << " at t = " << t;
      throw SolverError(msg.str(), dt);
    }
    EffectiveRow row;
    row.step = step;
    row.t = t;
    row.dt = dt;
    row.mass = theta_mass(rho, cfg.theta);
    row.max_J = std::max(max_abs(flux.J.xs()), max_abs(flux.J.ys()));
    row.bimodality = bimodality_coefficient(rho.raw());
    run.rows.push_back(row);

    rho = apply_divergence(rho, flux.J, dt, cfg.theta);
    t += dt;
    if (cfg.T - t <= t_eps) t = cfg.T;
    ++step;
  }
  auto flux = effective_flux(rho, cfg, omega, kernel, law);
  while (next_snap < snapshot_times.size()) {
    run.snapshots.push_back({t, rho, flux});
    ++next_snap;
  }
  run.steps = step;
  run.final_state = {t, rho, flux.J};
  return run;
}

double bimodality_coefficient(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  if (values.size() < 4) throw PreconditionError("bimodality needs at least four values");
  KahanSum s;
  for (double v : values) s.add(v);
  const double mean = s.value() / n;
  KahanSum m2, m3, m4;
  for (double v : values) {
    const double d = v - mean;
    m2.add(d * d);
    m3.add(d * d * d);
    m4.add(d * d * d * d);
  }
  const double var = m2.value() / n;
  if (var <= 0.0) return 0.0;
  const double g1 = (m3.value() / n) / std::pow(var, 1.5);
  const double g2 = (m4.value() / n) / (var * var) - 3.0;
  // Sample-size corrected skewness and excess kurtosis.
  const double G1 = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  const double G2 = (n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * g2 + 6.0);
  return (G1 * G1 + 1.0) / (G2 + 3.0 * (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)));
}

}  // namespace korteweg
