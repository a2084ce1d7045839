#include "korteweg/pore_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "korteweg/error.hpp"

namespace korteweg {
namespace {

void check_density(const CellField& rho, const DomainMask& mask, const PressureLaw& law) {
  if (!(rho.grid() == mask.grid())) throw PreconditionError("density and mask live on different grids");
  for (std::size_t k = 0; k < rho.size(); ++k)
    if (mask.fluid(k)) law.check_range(rho[k]);
}

double fluid_mass(const CellField& rho, const DomainMask& mask) {
  KahanSum s;
  for (std::size_t k = 0; k < rho.size(); ++k)
    if (mask.fluid(k)) s.add(rho[k]);
  return s.value() * mask.grid().cell_area();
}

// Adjacent cells of active face d: {left/below, right/above}.
std::pair<std::size_t, std::size_t> face_cells(const MacOperators& ops, int d) {
  const auto& g = ops.grid();
  if (d < ops.x_dofs()) {
    const auto [i, j] = ops.x_faces()[d];
    return {g.index(ops.left(i), j), g.index(i, j)};
  }
  const auto [i, j] = ops.y_faces()[d - ops.x_dofs()];
  return {g.index(i, ops.below(j)), g.index(i, j)};
}

}  // namespace

void PoreConfig::validate() const {
  if (!(mu > 0.0)) throw ConfigError("viscosity mu must be > 0");
  if (!(xi >= 0.0)) throw ConfigError("bulk viscosity xi must be >= 0");
  if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
  if (!(T > 0.0)) throw ConfigError("final time T must be > 0");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("CFL number must lie in (0, 1)");
  if (!(momentum_tolerance > 0.0)) throw ConfigError("momentum tolerance must be > 0");
  if (output_every < 1) throw ConfigError("output cadence must be >= 1");
  if (fixed_dt && !(*fixed_dt > 0.0)) throw ConfigError("fixed dt must be > 0");
}

MomentumSolver::MomentumSolver(const DomainMask& mask, double mu, double xi)
    : mu_(mu), xi_(xi), ops_(mask.grid(), mask.fluid_mask(), false), a_(ops_.momentum_operator(mu, xi)) {
  if (ops_.velocity_dofs() > 0) {
    chol_.compute(a_);
    if (chol_.info() != Eigen::Success) throw SolverError("factorization of the momentum operator failed");
  }
}

Vector MomentumSolver::solve(const Vector& f, double tolerance) const {
  if (f.size() == 0) return f;
  Vector u = chol_.solve(f);
  const double fn = f.norm();
  if (fn == 0.0) return Vector::Zero(f.size());
  const double res = (a_ * u - f).norm() / fn;
  if (!(res <= tolerance)) {
    std::ostringstream msg;
    msg << "momentum solve residual " << res << " exceeds tolerance " << tolerance;
    throw SolverError(msg.str(), res);
  }
  return u;
}

double MomentumSolver::dissipation(const Vector& u) const {
  const double h = ops_.grid().h;
  return h * h * u.dot(a_ * u);
}

double MomentumSolver::l2_norm(const Vector& u) const { return ops_.grid().h * u.norm(); }

double MomentumSolver::grad_norm(const Vector& u) const {
  const double h = ops_.grid().h;
  return std::sqrt(std::max(0.0, h * h * u.dot(ops_.laplacian() * u)));
}

Vector face_density(const CellField& rho, const MacOperators& ops, FaceDensityRule rule,
                    const EnergyFunction& energy, const Vector* u) {
  const int n = ops.velocity_dofs();
  Vector rf(n);
  const auto& law = energy.law();
  for (int d = 0; d < n; ++d) {
    const auto [l, r] = face_cells(ops, d);
    const double rl = rho[l], rr = rho[r];
    const double mean = 0.5 * (rl + rr);
    switch (rule) {
      case FaceDensityRule::upwind:
        if (!u) throw PreconditionError("upwind face density needs a velocity");
        rf[d] = (*u)[d] >= 0.0 ? rl : rr;
        break;
      case FaceDensityRule::arithmetic:
        rf[d] = mean;
        break;
      case FaceDensityRule::energy_consistent: {
        const double diff = rr - rl;
        if (std::abs(diff) <= 1e-7 * (std::abs(rl) + std::abs(rr))) {
          rf[d] = mean;
        } else {
          const double ratio = (law.P(rr) - law.P(rl)) / (energy.G(rr) - energy.G(rl));
          const bool inside = std::isfinite(ratio) && ratio >= std::min(rl, rr) && ratio <= std::max(rl, rr);
          rf[d] = inside ? ratio : mean;
        }
        break;
      }
    }
  }
  return rf;
}

Vector momentum_rhs(const CellField& rho, const DomainMask& mask, const MacOperators& ops, const Kernel& kernel,
                    const EnergyFunction& energy, const Vector& rho_face) {
  const auto& law = energy.law();
  const double gamma = law.gamma();
  const CellField conv = gamma != 0.0 ? convolve_wall(rho, mask, kernel, law.rho_s()) : CellField(rho.grid());
  const double ih = 1.0 / mask.grid().h;
  Vector f(ops.velocity_dofs());
  for (int d = 0; d < f.size(); ++d) {
    const auto [l, r] = face_cells(ops, d);
    f[d] = gamma * rho_face[d] * (conv[r] - conv[l]) * ih - (law.P(rho[r]) - law.P(rho[l])) * ih;
  }
  return f;
}

Vector momentum_rhs_pressure_form(const CellField& rho, const DomainMask& mask, const MacOperators& ops,
                                  const Kernel& kernel, const EnergyFunction& energy, const Vector& rho_face) {
  const auto& law = energy.law();
  const CellField cap = capillarity(rho, mask, kernel, law.rho_s());
  const double ih = 1.0 / mask.grid().h;
  const double gamma = law.gamma();
  Vector f(ops.velocity_dofs());
  for (int d = 0; d < f.size(); ++d) {
    const auto [l, r] = face_cells(ops, d);
    f[d] = -(law.p(rho[r]) - law.p(rho[l])) * ih + gamma * rho_face[d] * (cap[r] - cap[l]) * ih;
  }
  return f;
}

FaceField solve_momentum(const CellField& rho, const DomainMask& mask, const Kernel& kernel,
                         const EnergyFunction& energy, const PoreConfig& cfg) {
  cfg.validate();
  check_density(rho, mask, energy.law());
  const MomentumSolver solver(mask, cfg.mu, cfg.xi);
  const auto rule = cfg.face_density == FaceDensityRule::energy_consistent ? FaceDensityRule::energy_consistent
                                                                           : FaceDensityRule::arithmetic;
  const Vector rf = face_density(rho, solver.ops(), rule, energy);
  const Vector f = momentum_rhs(rho, mask, solver.ops(), kernel, energy, rf);
  return solver.ops().unpack(solver.solve(f, cfg.momentum_tolerance));
}

double transport_dt_limit(const CellField& rho, const MacOperators& ops, const Vector& flux, double eps,
                          double sigma) {
  std::vector<double> out(rho.size(), 0.0);
  for (int d = 0; d < flux.size(); ++d) {
    const auto [l, r] = face_cells(ops, d);
    if (flux[d] > 0.0) out[l] += flux[d];
    else out[r] -= flux[d];
  }
  double limit = std::numeric_limits<double>::infinity();
  const double scale = sigma * eps * eps * ops.grid().h;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (out[k] > 0.0) limit = std::min(limit, scale * std::max(rho[k], 0.0) / out[k]);
  return limit;
}

namespace {

CellField transport(const CellField& rho, const MacOperators& ops, const Vector& flux, double dt, double eps) {
  CellField next = rho;
  const double c = dt / (eps * eps * ops.grid().h);
  for (int d = 0; d < flux.size(); ++d) {
    const auto [l, r] = face_cells(ops, d);
    next[l] -= c * flux[d];
    next[r] += c * flux[d];
  }
  for (std::size_t k = 0; k < next.size(); ++k) {
    if (next[k] < -1e-14) {
      std::ostringstream msg;
      msg << "negative density " << next[k] << " after transport";
      throw SolverError(msg.str(), next[k]);
    }
    if (next[k] < 0.0) next[k] = 0.0;
  }
  return next;
}

}  // namespace

PoreState advance_density(const PoreState& state, const FaceField& u, double dt, const DomainMask& mask, double eps,
                          FaceDensityRule rule, const EnergyFunction* energy, double sigma) {
  if (!(dt >= 0.0)) throw PreconditionError("dt must be >= 0");
  const MacOperators ops(mask.grid(), mask.fluid_mask(), false);
  const Vector uv = ops.pack(u);
  Vector rf;
  if (rule == FaceDensityRule::energy_consistent) {
    if (!energy) throw PreconditionError("energy-consistent face density needs an energy function");
    rf = face_density(state.rho, ops, rule, *energy, &uv);
  } else {
    rf.resize(uv.size());
    for (int d = 0; d < uv.size(); ++d) {
      const auto [l, r] = face_cells(ops, d);
      rf[d] = rule == FaceDensityRule::upwind ? (uv[d] >= 0.0 ? state.rho[l] : state.rho[r])
                                              : 0.5 * (state.rho[l] + state.rho[r]);
    }
  }
  const Vector flux = rf.cwiseProduct(uv);
  const double limit = transport_dt_limit(state.rho, ops, flux, eps, sigma);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "CFL violation: dt = " << dt << " exceeds the positivity limit " << limit;
    throw SolverError(msg.str(), dt);
  }
  PoreState next;
  next.t = state.t + dt;
  next.rho = transport(state.rho, ops, flux, dt, eps);
  next.u = u;
  return next;
}

PoreRun run_pore(const CellField& rho0, const PoreConfig& cfg, const DomainMask& mask, const Kernel& kernel,
                 const EnergyFunction& energy, const std::vector<double>& snapshot_times) {
  cfg.validate();
  const auto& law = energy.law();
  check_density(rho0, mask, law);
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
    throw ConfigError("snapshot times must be sorted");
  for (double ts : snapshot_times)
    if (ts < 0.0 || ts > cfg.T * (1.0 + 1e-12)) throw ConfigError("snapshot time outside [0, T]");

  const MomentumSolver solver(mask, cfg.mu, cfg.xi);
  const auto& ops = solver.ops();
  const double omega = cfg.eps * cfg.eps;
  const FreeEnergyEvaluator fe(mask, kernel, energy, omega);
  const auto force_rule = cfg.face_density == FaceDensityRule::energy_consistent ? FaceDensityRule::energy_consistent
                                                                                 : FaceDensityRule::arithmetic;
  const double area = mask.grid().cell_area();
  const double t_eps = 1e-12 * cfg.T;

  PoreRun run;
  CellField rho = rho0;
  double t = 0.0;
  FreeEnergy e = fe(rho);
  std::size_t next_snap = 0;
  int step = 0;

  auto velocity = [&](const CellField& r) {
    const Vector rf = face_density(r, ops, force_rule, energy);
    return solver.solve(momentum_rhs(r, mask, ops, kernel, energy, rf), cfg.momentum_tolerance);
  };

  while (cfg.T - t > t_eps) {
    if (cfg.max_steps && step >= *cfg.max_steps) break;
    const Vector u = velocity(rho);
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= t + t_eps) {
      run.snapshots.push_back({t, rho, ops.unpack(u)});
      ++next_snap;
    }

    Vector rf;
    if (cfg.face_density == FaceDensityRule::upwind) rf = face_density(rho, ops, FaceDensityRule::upwind, energy, &u);
    else rf = face_density(rho, ops, force_rule, energy);
    const Vector flux = rf.cwiseProduct(u);

    const double dt_pos = transport_dt_limit(rho, ops, flux, cfg.eps, cfg.cfl);
    double dt;
    if (cfg.fixed_dt) {
      dt = *cfg.fixed_dt;
      if (dt > transport_dt_limit(rho, ops, flux, cfg.eps, 1.0)) {
        std::ostringstream msg;
        msg << "CFL violation at t = " << t << ": fixed dt " << dt << " exceeds the positivity limit";
        throw SolverError(msg.str(), dt);
      }
    } else {
      double stiff = 0.0;
      for (std::size_t k = 0; k < rho.size(); ++k)
        if (mask.fluid(k)) stiff = std::max(stiff, rho[k] * std::abs(law.dP(rho[k])) + law.gamma() * rho[k] * rho[k]);
      const double dt_stab = stiff > 0.0 ? cfg.cfl * omega * cfg.mu / stiff : std::numeric_limits<double>::infinity();
      dt = std::min(dt_pos, dt_stab);
    }
    dt = std::min(dt, cfg.T - t);
    if (next_snap < snapshot_times.size()) dt = std::min(dt, snapshot_times[next_snap] - t);
    if (!std::isfinite(dt)) dt = cfg.T - t;  // u = 0: nothing moves
    if (dt < 1e-12 * cfg.T) {
      std::ostringstream msg;
      msg << "time step collapsed to " << dt << " at t = " << t;
      throw SolverError(msg.str(), dt);
    }

    CellField next = transport(rho, ops, flux, dt, cfg.eps);
    const FreeEnergy e_next = fe(next);

    PoreDiagnostics row;
    row.step = step;
    row.t = t;
    row.dt = dt;
    row.mass = fluid_mass(rho, mask);
    row.energy = e;
    row.dissipation = solver.dissipation(u);
    row.residual = (e_next.total() - e.total()) / dt + row.dissipation;
    row.max_u = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    row.u_l2 = solver.l2_norm(u);
    row.du_l2 = solver.grad_norm(u);
    row.w_integral = e.bulk / omega;
    KahanSum r2;
    for (std::size_t k = 0; k < rho.size(); ++k)
      if (mask.fluid(k)) r2.add(rho[k] * rho[k]);
    row.rho_l2 = std::sqrt(area * r2.value());
    run.rows.push_back(row);
    run.max_residual = std::max(run.max_residual, std::abs(row.residual));
    run.max_energy_increase = std::max(run.max_energy_increase, e_next.total() - e.total());

    rho = std::move(next);
    e = e_next;
    t += dt;
    if (cfg.T - t <= t_eps) t = cfg.T;
    ++step;
  }

  const FaceField u_final = ops.unpack(velocity(rho));
  while (next_snap < snapshot_times.size()) {
    run.snapshots.push_back({t, rho, u_final});
    ++next_snap;
  }
  run.steps = step;
  run.final_state = {t, rho, u_final};
  return run;
}

}  // namespace korteweg
