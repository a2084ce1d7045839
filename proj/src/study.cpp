#include "korteweg/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "korteweg/error.hpp"

namespace korteweg {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double l2_distance(const CellField& a, const CellField& b) {
  KahanSum s;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s.add(d * d);
  }
  return std::sqrt(a.grid().cell_area() * s.value());
}

double l2_norm(const CellField& a) {
  KahanSum s;
  for (double v : a.raw()) s.add(v * v);
  return std::sqrt(a.grid().cell_area() * s.value());
}

struct PoreOutcome {
  StudyRow row;
  std::string failure;
};

}  // namespace

CellField InitialDatum::evaluate(const GridSpec& grid, const Rect& omega) const {
  CellField f(grid, base);
  const double pi = std::acos(-1.0);
  switch (kind) {
    case Kind::constant:
      break;
    case Kind::gaussian:
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
          const double dx = grid.xc(i) - center[0], dy = grid.yc(j) - center[1];
          f(i, j) += amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
        }
      break;
    case Kind::modes:
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
          const double sx = (grid.xc(i) - omega.x0) / omega.width();
          const double sy = (grid.yc(j) - omega.y0) / omega.height();
          for (const auto& m : modes) f(i, j) += m.amplitude * std::cos(m.kx * pi * sx) * std::cos(m.ky * pi * sy);
        }
      break;
    case Kind::noise: {
      std::mt19937_64 rng(seed);
      CellField noise(grid);
      for (auto& v : noise.raw()) v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
      for (int pass = 0; pass < smoothing; ++pass) {
        CellField next(grid);
        for (int j = 0; j < grid.ny; ++j)
          for (int i = 0; i < grid.nx; ++i) {
            double s = noise(i, j);
            int n = 1;
            if (i > 0) s += noise(i - 1, j), ++n;
            if (i + 1 < grid.nx) s += noise(i + 1, j), ++n;
            if (j > 0) s += noise(i, j - 1), ++n;
            if (j + 1 < grid.ny) s += noise(i, j + 1), ++n;
            next(i, j) = s / n;
          }
        noise = std::move(next);
      }
      const double peak = max_abs(noise.values());
      for (std::size_t k = 0; k < f.size(); ++k) f[k] += peak > 0.0 ? amplitude * noise[k] / peak : 0.0;
      break;
    }
  }
  return f;
}

bool ConvergenceReport::e_rho_decreasing() const {
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(r.e_rho);
  return complete && strictly_decreasing(e, 1e-13);
}

bool ConvergenceReport::darcy_decreasing() const {
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(r.darcy_residual);
  return complete && strictly_decreasing(e, 1e-13);
}

bool ConvergenceReport::apriori_uniform(double factor) const {
  if (!complete || rows.empty()) return false;
  const auto& c = rows.front().apriori;
  for (const auto& r : rows) {
    const auto& a = r.apriori;
    if (a.u_over_eps2_l2l2 > factor * c.u_over_eps2_l2l2 + 1e-300) return false;
    if (a.u_over_eps_l2h1 > factor * c.u_over_eps_l2h1 + 1e-300) return false;
    if (std::abs(a.sup_w_integral) > factor * std::abs(c.sup_w_integral) + 1e-300) return false;
    if (a.sup_rho_l2 > factor * c.sup_rho_l2 + 1e-300) return false;
  }
  return true;
}

double ConvergenceReport::poincare_spread() const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    if (r.poincare.used == 0) continue;
    lo = std::min(lo, r.poincare.max_ratio);
    hi = std::max(hi, r.poincare.max_ratio);
  }
  if (!(lo > 0.0) || !std::isfinite(lo)) return 0.0;
  return (hi - lo) / lo;
}

double choose_final_time(const CellField& rho0, const EffectiveConfig& cfg, const DomainMask& omega,
                         const Kernel& kernel, const PressureLaw& law, double change, double start, double t_max) {
  const double norm0 = l2_norm(rho0);
  if (norm0 == 0.0) return start;
  std::vector<double> times;
  for (double T = start; T < t_max; T *= 2.0) times.push_back(T);
  times.push_back(t_max);
  EffectiveConfig c = cfg;
  c.T = t_max;
  std::size_t taken = 0;
  double chosen = t_max;
  run_effective(rho0, c, omega, kernel, law, times, [&](const EffectiveSnapshot& s) {
    const double T = times[taken++];
    if (l2_distance(s.rho, rho0) < change * norm0) return false;
    chosen = T;
    return true;
  });
  return chosen;
}

double darcy_residual(const PoreSnapshot& pore, const EffectiveSnapshot& effective, double eps,
                      const std::vector<TestFunction>& tests, double rho_floor) {
  const auto& g = effective.rho.grid();
  if (!(pore.u.grid() == g)) throw PreconditionError("pore and effective snapshots live on different grids");
  const auto& ud = effective.flux.u;
  const auto& rho = effective.rho;
  const double inv = 1.0 / (eps * eps);
  double worst = 0.0;
  for (const auto& psi : tests) {
    KahanSum sx, sy;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) {
        const double rf = 0.5 * (rho(i - 1, j) + rho(i, j));
        const double u = rf > rho_floor ? ud.x(i, j) : 0.0;
        sx.add((pore.u.x(i, j) * inv - u) * psi.psi(g.x0 + i * g.h, g.yc(j)));
      }
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double rf = 0.5 * (rho(i, j - 1) + rho(i, j));
        const double u = rf > rho_floor ? ud.y(i, j) : 0.0;
        sy.add((pore.u.y(i, j) * inv - u) * psi.psi(g.xc(i), g.y0 + j * g.h));
      }
    worst = std::max({worst, std::abs(g.cell_area() * sx.value()), std::abs(g.cell_area() * sy.value())});
  }
  return worst;
}

AprioriRow apriori_row(double eps, const PoreRun& run) {
  AprioriRow a;
  a.eps = eps;
  KahanSum u2, h1;
  if (!run.rows.empty()) a.sup_w_integral = -std::numeric_limits<double>::infinity();
  const double m0 = run.rows.empty() ? 0.0 : run.rows.front().mass;
  for (const auto& r : run.rows) {
    u2.add(r.dt * r.u_l2 * r.u_l2);
    h1.add(r.dt * (r.u_l2 * r.u_l2 + r.du_l2 * r.du_l2));
    a.sup_w_integral = std::max(a.sup_w_integral, r.w_integral);
    a.sup_rho_l2 = std::max(a.sup_rho_l2, r.rho_l2);
    if (m0 > 0.0) a.mass_variation = std::max(a.mass_variation, std::abs(r.mass - m0) / m0);
  }
  a.u_over_eps2_l2l2 = std::sqrt(u2.value()) / (eps * eps);
  a.u_over_eps_l2h1 = std::sqrt(h1.value()) / eps;
  return a;
}

PoincareRow poincare_row(double eps, const PoreRun& run) {
  PoincareRow p;
  p.eps = eps;
  p.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& r : run.rows) {
    if (!(r.u_l2 > 0.0) || !(r.du_l2 > 0.0)) {
      ++p.skipped;
      continue;
    }
    const double ratio = r.u_l2 / (eps * r.du_l2);
    p.max_ratio = std::max(p.max_ratio, ratio);
    p.min_ratio = std::min(p.min_ratio, ratio);
    ++p.used;
  }
  if (p.used == 0) p.min_ratio = 0.0;
  return p;
}

ConvergenceReport convergence_study(const StudyConfig& cfg) {
  if (!cfg.cell) throw ConfigError("study needs a unit cell");
  if (cfg.eps.empty()) throw ConfigError("study needs at least one eps");
  for (std::size_t k = 1; k < cfg.eps.size(); ++k)
    if (!(cfg.eps[k] < cfg.eps[k - 1])) throw ConfigError("eps list must be strictly decreasing");
  if (cfg.n_times < 1) throw ConfigError("study needs at least one comparison time");

  // All masks on one grid; rejects incompatible eps / h up front.
  std::vector<DomainMask> masks;
  for (double eps : cfg.eps) masks.push_back(DomainMask::build(cfg.cell, cfg.omega, eps, cfg.h));
  const DomainMask full = unperforated(cfg.omega, cfg.h);
  const Kernel kernel = Kernel::make(cfg.delta, cfg.h);
  const auto& law = cfg.energy.law();

  ConvergenceReport rep;
  EffectiveConfig ecfg = cfg.effective;
  if (!cfg.effective_coefficients_given) {
    const auto t0 = Clock::now();
    const auto perm = permeability(*cfg.cell, cfg.cell_options);
    rep.cell_seconds = seconds_since(t0);
    ecfg.A = perm.A;
    ecfg.theta = cfg.cell->porosity();
  }
  rep.theta = ecfg.theta;
  rep.A = ecfg.A;

  const CellField rho0 = cfg.initial.evaluate(full.grid(), cfg.omega);
  rep.T = cfg.T ? *cfg.T : choose_final_time(rho0, ecfg, full, kernel, law, cfg.dry_run_change);
  ecfg.T = rep.T;
  for (int j = 1; j <= cfg.n_times; ++j) rep.times.push_back(rep.T * j / cfg.n_times);
  const double dt_cmp = rep.T / cfg.n_times;

  EffectiveRun eff;
  try {
    const auto t0 = Clock::now();
    eff = run_effective(rho0, ecfg, full, kernel, law, rep.times);
    rep.effective_seconds = seconds_since(t0);
    rep.effective_steps = eff.steps;
  } catch (const std::exception& e) {
    rep.failure = std::string("effective run: ") + e.what();
    return rep;
  }

  double rho_max = 0.0;
  for (double v : rho0.raw()) rho_max = std::max(rho_max, v);
  const double rho_floor = cfg.rho_floor_factor * rho_max;
  const auto tests = default_test_functions(cfg.omega);

  auto run_one = [&](std::size_t idx) -> PoreOutcome {
    PoreOutcome out;
    const double eps = cfg.eps[idx];
    out.row.eps = eps;
    try {
      const auto t0 = Clock::now();
      PoreConfig pcfg = cfg.pore;
      pcfg.eps = eps;
      pcfg.T = rep.T;
      const PoreRun run = run_pore(rho0, pcfg, masks[idx], kernel, cfg.energy, rep.times);
      out.row.seconds = seconds_since(t0);
      out.row.steps = run.steps;
      KahanSum e2, d2;
      for (std::size_t j = 0; j < rep.times.size(); ++j) {
        const auto hat = mean_value_extend(run.snapshots[j].rho, masks[idx]);
        const double e = l2_distance(hat.values, eff.snapshots[j].rho);
        const double d = darcy_residual(run.snapshots[j], eff.snapshots[j], eps, tests, rho_floor);
        out.row.e_rho_at.push_back(e);
        out.row.darcy_at.push_back(d);
        e2.add(e * e * dt_cmp);
        d2.add(d * d * dt_cmp);
      }
      out.row.e_rho = std::sqrt(e2.value());
      out.row.darcy_residual = std::sqrt(d2.value());
      out.row.apriori = apriori_row(eps, run);
      out.row.poincare = poincare_row(eps, run);
    } catch (const std::exception& e) {
      out.failure = "pore run at eps = " + std::to_string(eps) + ": " + e.what();
    }
    return out;
  };

  std::vector<PoreOutcome> outcomes(cfg.eps.size());
  if (cfg.threads > 1) {
    std::size_t next = 0;
    while (next < cfg.eps.size()) {
      std::vector<std::future<PoreOutcome>> batch;
      std::vector<std::size_t> ids;
      for (int t = 0; t < cfg.threads && next < cfg.eps.size(); ++t, ++next) {
        ids.push_back(next);
        batch.push_back(std::async(std::launch::async, run_one, next));
      }
      for (std::size_t b = 0; b < batch.size(); ++b) outcomes[ids[b]] = batch[b].get();
    }
  } else {
    for (std::size_t k = 0; k < cfg.eps.size(); ++k) outcomes[k] = run_one(k);
  }

  for (auto& o : outcomes) {
    if (o.failure.empty()) rep.rows.push_back(std::move(o.row));
    else if (rep.failure.empty()) rep.failure = o.failure;
  }
  rep.complete = rep.failure.empty();
  return rep;
}

}  // namespace korteweg
