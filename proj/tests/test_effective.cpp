#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "korteweg/effective_solver.hpp"
#include "korteweg/error.hpp"
#include "support.hpp"

using namespace korteweg;

namespace {

constexpr double pi = std::numbers::pi;

CellField smooth(const GridSpec& g, double base, double amp) {
  CellField rho(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      rho(i, j) = base + amp * std::cos(pi * g.xc(i)) * std::cos(pi * g.yc(j)) + 0.3 * amp * std::sin(2 * pi * g.yc(j));
  return rho;
}

double theta_mass(const CellField& rho, double theta) {
  KahanSum s;
  for (double v : rho.raw()) s.add(v);
  return theta * rho.grid().cell_area() * s.value();
}

// Independent evaluation of the limit flux on one face: scalar driving force
// from brute-force convolutions, transverse force averaged from the four
// orthogonal neighbours, donor mobility by the sign of the Darcy velocity.
struct SlowFlux {
  const CellField& rho;
  const DomainMask& omega;
  const Kernel& kernel;
  const PressureLaw& law;
  const EffectiveConfig& cfg;

  double c(int i, int j) const {
    return testing::brute_wall_convolution(rho, omega, kernel, law.rho_s(), i, j) - rho(i, j);
  }
  double q(int i, int j) const {
    const double r = rho(i, j);
    return law.p(r) + law.gamma() * (1.0 - cfg.theta) * r * r / 2.0;
  }
  // Face-normal force on the face between (i0, j0) and (i1, j1).
  double force(int i0, int j0, int i1, int j1) const {
    const auto& g = rho.grid();
    if (i0 < 0 || j0 < 0 || i1 >= g.nx || j1 >= g.ny) return 0.0;
    const double rbar = (rho(i0, j0) + rho(i1, j1)) / 2.0;
    return (law.gamma() * cfg.theta * rbar * (c(i1, j1) - c(i0, j0)) - (q(i1, j1) - q(i0, j0))) / g.h;
  }
  double fx(int i, int j) const { return force(i - 1, j, i, j); }
  double fy(int i, int j) const { return force(i, j - 1, i, j); }

  double jx(int i, int j) const {
    const double ty = (fy(i - 1, j) + fy(i - 1, j + 1) + fy(i, j) + fy(i, j + 1)) / 4.0;
    const double u = (cfg.A[0][0] * fx(i, j) + cfg.A[0][1] * ty) / cfg.mu;
    return u * (u >= 0.0 ? rho(i - 1, j) : rho(i, j));
  }
  double jy(int i, int j) const {
    const double tx = (fx(i, j - 1) + fx(i + 1, j - 1) + fx(i, j) + fx(i + 1, j)) / 4.0;
    const double u = (cfg.A[1][0] * tx + cfg.A[1][1] * fy(i, j)) / cfg.mu;
    return u * (u >= 0.0 ? rho(i, j - 1) : rho(i, j));
  }
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("configuration validation and theta override") {
  EffectiveConfig c;
  CHECK_NOTHROW(c.validate());
  c.theta = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.theta_override = true;
  CHECK_NOTHROW(c.validate());
  c = {};
  c.theta = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.mu = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.A[0][1] = NAN;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("flux agrees with an independent slow evaluation") {
  testing::Gen gen(81);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = trial % 2 ? 16 : 24;
    const auto omega = unperforated(Rect{}, 1.0 / n);
    const auto kernel = Kernel::make(gen.uniform(2.0 / n, 0.2), 1.0 / n);
    const auto law = make_pressure(CubicLaw{0.1, 0.5}, gen.uniform(0.5, 4.0), gen.uniform(0.3, 0.8), 3.0);
    EffectiveConfig cfg;
    cfg.theta = gen.uniform(0.3, 0.95);
    cfg.mu = gen.uniform(0.5, 2.0);
    cfg.A = {{{gen.uniform(0.01, 0.05), gen.uniform(-0.01, 0.01)}, {gen.uniform(-0.01, 0.01), gen.uniform(0.01, 0.05)}}};
    const auto rho = gen.smooth_field(omega.grid(), 0.6, 0.4);
    const auto fast = effective_flux(rho, cfg, omega, kernel, law);
    const SlowFlux slow{rho, omega, kernel, law, cfg};
    double scale = 0.0, diff = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        const double s = slow.jx(i, j);
        scale = std::max(scale, std::abs(s));
        diff = std::max(diff, std::abs(s - fast.J.x(i, j)));
      }
    for (int j = 1; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double s = slow.jy(i, j);
        scale = std::max(scale, std::abs(s));
        diff = std::max(diff, std::abs(s - fast.J.y(i, j)));
      }
    REQUIRE(scale > 0.0);
    CHECK(diff <= 1e-10 * scale);
    for (int j = 0; j < n; ++j) {
      CHECK(fast.J.x(0, j) == 0.0);
      CHECK(fast.J.x(n, j) == 0.0);
      CHECK(fast.J.y(j, 0) == 0.0);
      CHECK(fast.J.y(j, n) == 0.0);
    }
  }
}

TEST_CASE("theta = 1 without capillarity reduces to the porous-medium flux") {
  CHECK(effective_coefficients(1.0, 0.0).nonlocal == 0.0);
  CHECK(effective_coefficients(1.0, 0.0).quadratic == 0.0);
  CHECK(effective_coefficients(1.0, 2.0).quadratic == 0.0);
  CHECK(effective_coefficients(0.6, 2.0).nonlocal == doctest::Approx(1.2));
  CHECK(effective_coefficients(0.6, 2.0).quadratic == doctest::Approx(0.4));
  testing::Gen gen(83);
  const auto omega = unperforated(Rect{}, 1.0 / 32);
  const auto kernel = Kernel::make(0.1, 1.0 / 32);
  for (double b : {1.0, 2.0, 3.0}) {
    const auto law = make_pressure(PolytropicLaw{1.0, b}, 0.0, 1.0, 10.0);
    EffectiveConfig cfg;
    cfg.theta = 1.0;
    cfg.theta_override = true;
    cfg.A = {{{0.02, 0.001}, {0.001, 0.03}}};
    const auto rho = gen.field(omega.grid(), 0.1, 2.0);
    const auto a = effective_flux(rho, cfg, omega, kernel, law);
    const auto p = porous_medium_flux(rho, cfg.A, cfg.mu, law);
    CHECK(bitwise_equal(a.J.xs(), p.J.xs()));
    CHECK(bitwise_equal(a.J.ys(), p.J.ys()));
  }
}

TEST_CASE("wall density is a fixed point") {
  const auto omega = unperforated(Rect{}, 1.0 / 32);
  const auto kernel = Kernel::make(0.1, 1.0 / 32);
  const auto law = make_pressure(CubicLaw{0.1, 0.5}, 3.0, 0.5, 3.0);
  EffectiveConfig cfg;
  const CellField rho(omega.grid(), 0.5);
  const auto f = effective_flux(rho, cfg, omega, kernel, law);
  for (double v : f.J.xs()) CHECK(v == 0.0);
  for (double v : f.J.ys()) CHECK(v == 0.0);
  const auto next = step_effective({0.0, rho, f.J}, 1e-4, cfg, omega, kernel, law);
  CHECK(bitwise_equal(next.rho.raw(), rho.raw()));
  cfg.T = 0.5;
  const auto run = run_effective(rho, cfg, omega, kernel, law, {0.0, 0.5});
  CHECK(bitwise_equal(run.final_state.rho.raw(), rho.raw()));
  REQUIRE(run.snapshots.size() == 2);
  CHECK(run.snapshots[1].t == 0.5);
}

TEST_CASE("theta-weighted mass is conserved per step and over a run") {
  const auto omega = unperforated(Rect{}, 1.0 / 24);
  const auto kernel = Kernel::make(0.1, 1.0 / 24);
  const auto law = make_pressure(CubicLaw{0.1, 0.5}, 3.0, 0.5, 3.0);
  EffectiveConfig cfg;
  cfg.theta = 0.8;
  cfg.A = {{{1.0, 0.2}, {0.2, 0.7}}};
  cfg.T = 0.05;
  const auto rho0 = smooth(omega.grid(), 0.5, 0.2);
  const double m0 = theta_mass(rho0, cfg.theta);
  const auto f = effective_flux(rho0, cfg, omega, kernel, law);
  const double dt = effective_dt_limit(rho0, f, cfg, law, 0.5);
  const auto one = step_effective({0.0, rho0, f.J}, dt, cfg, omega, kernel, law);
  CHECK(std::abs(theta_mass(one.rho, cfg.theta) - m0) <= 1e-13 * m0);
  const auto run = run_effective(rho0, cfg, omega, kernel, law);
  CHECK(run.steps > 10);
  CHECK(std::abs(theta_mass(run.final_state.rho, cfg.theta) - m0) <= 1e-12 * m0);
  for (const auto& r : run.rows) CHECK(std::abs(r.mass - m0) <= 1e-12 * m0);
  for (double v : run.final_state.rho.raw()) CHECK(v >= 0.0);
}

TEST_CASE("steps above the stability bound are rejected") {
  const auto omega = unperforated(Rect{}, 1.0 / 16);
  const auto kernel = Kernel::make(0.125, 1.0 / 16);
  const auto law = make_pressure(PolytropicLaw{1.0, 2.0}, 0.0, 1.0, 10.0);
  EffectiveConfig cfg;
  const auto rho = smooth(omega.grid(), 1.0, 0.3);
  const auto f = effective_flux(rho, cfg, omega, kernel, law);
  const double limit = effective_dt_limit(rho, f, cfg, law, 1.0);
  CHECK(std::isfinite(limit));
  CHECK_NOTHROW(step_effective({0.0, rho, f.J}, 0.99 * limit, cfg, omega, kernel, law));
  CHECK_THROWS_AS(step_effective({0.0, rho, f.J}, 1.01 * limit, cfg, omega, kernel, law), SolverError);
  cfg.fixed_dt = 2.0 * limit;
  CHECK_THROWS_AS(run_effective(rho, cfg, omega, kernel, law), SolverError);
}

TEST_CASE("time stepping self-converges at first order in the reduced case") {
  const int n = 16;
  const auto omega = unperforated(Rect{}, 1.0 / n);
  const auto kernel = Kernel::make(0.125, 1.0 / n);
  const auto law = make_pressure(PolytropicLaw{1.0, 2.0}, 0.0, 1.0, 10.0);
  const auto rho0 = smooth(omega.grid(), 1.0, 0.3);
  auto solve = [&](double dt) {
    EffectiveConfig cfg;
    cfg.theta = 1.0;
    cfg.theta_override = true;
    cfg.T = 0.02;
    cfg.fixed_dt = dt;
    return run_effective(rho0, cfg, omega, kernel, law).final_state.rho;
  };
  const auto ref = solve(1e-4 / 32);
  double err[3];
  int k = 0;
  for (double dt : {1e-4, 5e-5, 2.5e-5}) {
    const auto r = solve(dt);
    double e = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) e = std::max(e, std::abs(r[q] - ref[q]));
    err[k++] = e;
  }
  INFO("errors " << err[0] << " " << err[1] << " " << err[2]);
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("noisy spinodal mixture separates into two phases") {
  const int n = 12;
  const auto omega = unperforated(Rect{}, 1.0 / n);
  const auto kernel = Kernel::make(2.0 / n, 1.0 / n);
  // Long waves are unstable when p'(0.5) + gamma 0.5 (1 - theta) < 0.
  const auto law = make_pressure(CubicLaw{0.1, 0.7}, 2.52, 0.5, 2.0);
  const auto adm = check_admissibility(law, 2.0, 1000);
  CHECK(adm.find("3 P'>=alpha")->pass);
  CHECK(adm.find("3 P''>=alpha")->pass);
  EffectiveConfig cfg;
  cfg.theta = 0.99;
  cfg.T = 40.0;
  testing::Gen gen(89);
  const auto rho0 = gen.field(omega.grid(), 0.45, 0.55);
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(cfg.T * k / 10);
  const auto run = run_effective(rho0, cfg, omega, kernel, law, times);
  REQUIRE(run.snapshots.size() == 11);
  std::vector<double> bim;
  for (const auto& s : run.snapshots) bim.push_back(bimodality_coefficient(s.rho.raw()));
  for (std::size_t k = 6; k < bim.size(); ++k) CHECK(bim[k] > bim[k - 1]);
  const auto& last = run.final_state.rho.raw();
  const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
  CHECK(*hi - *lo > 0.4);  // initial spread is 0.1
  const auto sp = law.spinodal();
  REQUIRE(sp.has_value());
  CHECK(*lo < sp->first);
  CHECK(*hi > sp->second);
}

TEST_CASE("bimodality coefficient examples") {
  std::vector<double> two(100);
  for (int k = 0; k < 100; ++k) two[k] = k % 2 ? 1.0 : 0.0;
  CHECK(bimodality_coefficient(two) > 5.0 / 9.0);
  std::vector<double> flat(101);
  for (int k = 0; k <= 100; ++k) flat[k] = k;
  CHECK(bimodality_coefficient(flat) == doctest::Approx(5.0 / 9.0).epsilon(0.05));
  CHECK(bimodality_coefficient(std::vector<double>(10, 1.0)) == 0.0);
  CHECK_THROWS_AS(bimodality_coefficient({1.0, 2.0, 3.0}), PreconditionError);
}

TEST_CASE("early stop returns after the requested snapshot") {
  const auto omega = unperforated(Rect{}, 1.0 / 16);
  const auto kernel = Kernel::make(0.125, 1.0 / 16);
  const auto law = make_pressure(PolytropicLaw{1.0, 2.0}, 0.0, 1.0, 10.0);
  EffectiveConfig cfg;
  cfg.T = 0.2;
  const auto rho0 = smooth(omega.grid(), 1.0, 0.3);
  const auto run = run_effective(rho0, cfg, omega, kernel, law, {0.0, 0.05, 0.1, 0.2},
                                 [](const EffectiveSnapshot& s) { return s.t >= 0.05; });
  REQUIRE(run.snapshots.size() == 2);
  CHECK(run.final_state.t == doctest::Approx(0.05));
}
