#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "korteweg/error.hpp"
#include "korteweg/geometry.hpp"
#include "support.hpp"

using namespace korteweg;

namespace {

std::shared_ptr<const UnitCell> disc_cell(int m, double r = 0.25) {
  return std::make_shared<const UnitCell>(UnitCell::build(DiscGrain{{0.5, 0.5}, r}, m));
}

// Independent count of lattice copies with [eps k, eps (k + 1)]^2 strictly
// inside the closed rectangle and not touching its boundary.
int enumerate_interior_copies(const Rect& omega, double eps) {
  int count = 0;
  for (int ky = -50; ky <= 50; ++ky)
    for (int kx = -50; kx <= 50; ++kx) {
      const double x0 = eps * kx, x1 = eps * (kx + 1), y0 = eps * ky, y1 = eps * (ky + 1);
      const double tol = 1e-12;
      if (x0 > omega.x0 + tol && x1 < omega.x1 - tol && y0 > omega.y0 + tol && y1 < omega.y1 - tol) ++count;
    }
  return count;
}

}  // namespace

TEST_CASE("disc porosity matches the analytic area within 2/m") {
  const auto c64 = UnitCell::build(DiscGrain{{0.5, 0.5}, 0.25}, 64);
  CHECK(std::abs(c64.porosity() - (1.0 - std::numbers::pi / 16.0)) <= 2.0 / 64);
  CHECK(c64.analytic_porosity() == doctest::Approx(1.0 - std::numbers::pi / 16.0));
  const auto c128 = UnitCell::build(DiscGrain{{0.5, 0.5}, 0.45}, 128);
  CHECK(std::abs(c128.porosity() - (1.0 - 0.2025 * std::numbers::pi)) <= 2.0 / 128);
}

TEST_CASE("solid iff the cell centre lies in the closed grain") {
  testing::Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = gen.integer(8, 40);
    const double r = gen.uniform(0.05, 0.35);
    const DiscGrain disc{{gen.uniform(0.47, 0.53), gen.uniform(0.47, 0.53)}, r};
    const auto cell = UnitCell::build(disc, m);
    std::size_t solid = 0;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double x = (i + 0.5) / m, y = (j + 0.5) / m;
        const bool expect = std::hypot(x - disc.center[0], y - disc.center[1]) <= r;
        if (expect) ++solid;
        REQUIRE(cell.solid(i, j) == expect);
      }
    CHECK(cell.solid_cells() == solid);
  }
}

TEST_CASE("degenerate and boundary-touching grains are rejected") {
  CHECK_THROWS_WITH_AS(UnitCell::build(DiscGrain{{0.5, 0.5}, 0.0}, 16), "empty solid grain", ConfigError);
  CHECK_THROWS_AS(UnitCell::build(DiscGrain{{0.5, 0.5}, 0.5}, 16), ConfigError);
  CHECK_THROWS_AS(UnitCell::build(SquareGrain{{0.3, 0.5}, 0.3}, 16), ConfigError);
  CHECK_THROWS_AS(UnitCell::build(DiscGrain{{0.5, 0.5}, 0.25}, 16, 0.2), ConfigError);
}

TEST_CASE("square and ellipse grains stamp the expected cells") {
  const auto sq = UnitCell::build(SquareGrain{{0.5, 0.5}, 0.25}, 8);
  CHECK(sq.solid_cells() == 16);
  CHECK(sq.porosity() == doctest::Approx(0.75));
  const auto el = UnitCell::build(EllipseGrain{{0.5, 0.5}, 0.3, 0.2}, 100);
  CHECK(std::abs(el.porosity() - (1.0 - std::numbers::pi * 0.06)) <= 2.0 / 100);
}

TEST_CASE("annulus lies between grain and annulus radius") {
  const auto cell = UnitCell::build(DiscGrain{{0.5, 0.5}, 0.2}, 32);
  CHECK(cell.annulus_radius() == doctest::Approx(0.35));
  CHECK(cell.annulus_cells() > 0);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) {
      const double d = std::hypot((i + 0.5) / 32 - 0.5, (j + 0.5) / 32 - 0.5);
      CHECK(cell.annulus(i, j) == (d <= 0.35 && !cell.solid(i, j)));
    }
}

TEST_CASE("K_eps counts agree with brute-force enumeration") {
  const auto cell = disc_cell(8);
  const Rect unit{};
  for (double eps : {0.5, 0.25, 0.125, 0.0625}) {
    const auto mask = DomainMask::build(cell, unit, eps, 0.0625 / 8);
    CHECK(static_cast<int>(mask.copies().size()) == enumerate_interior_copies(unit, eps));
  }
  CHECK(DomainMask::build(cell, unit, 0.25, 1.0 / 64).copies().size() == 4);
  const Rect wide{0.0, 0.0, 2.0, 1.0};
  CHECK(static_cast<int>(DomainMask::build(cell, wide, 0.25, 1.0 / 32).copies().size()) ==
        enumerate_interior_copies(wide, 0.25));
}

TEST_CASE("large eps leaves Omega without grains") {
  const auto cell = disc_cell(8);
  const auto mask = DomainMask::build(cell, Rect{}, 2.0, 1.0 / 4);
  CHECK(mask.copies().empty());
  CHECK(mask.fluid_cells() == mask.grid().cells());
  CHECK(std::isnan(mask.measured_porosity()));
}

TEST_CASE("grains appear only inside Omega_K and match the unit cell") {
  const auto cell = disc_cell(8);
  const double eps = 0.125, h = eps / 16;  // block factor 2
  const auto mask = DomainMask::build(cell, Rect{}, eps, h);
  CHECK(mask.block_factor() == 2);
  CHECK(mask.cells_per_copy() == 16);
  const auto& g = mask.grid();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int cx = static_cast<int>(std::floor(g.xc(i) / eps)), cy = static_cast<int>(std::floor(g.yc(j) / eps));
      const bool interior = cx >= 1 && cy >= 1 && cx <= 6 && cy <= 6;
      CHECK(mask.in_omega_k(i, j) == interior);
      if (!interior) {
        CHECK(mask.fluid(i, j));
        continue;
      }
      const int ui = (i % 16) / 2, uj = (j % 16) / 2;
      CHECK(mask.fluid(i, j) == !cell->solid(ui, uj));
    }
}

TEST_CASE("Omega_K porosity equals the unit-cell porosity") {
  const auto cell = disc_cell(8);
  const auto mask = DomainMask::build(cell, Rect{}, 0.125, 0.125 / 8);
  CHECK(mask.measured_porosity() == doctest::Approx(cell->porosity()).epsilon(1e-12));
}

TEST_CASE("boundary layer area shrinks with eps") {
  const auto cell = disc_cell(8);
  double previous = 2.0;
  for (double eps : {0.25, 0.125, 0.0625}) {
    const auto mask = DomainMask::build(cell, Rect{}, eps, 1.0 / 128);
    const double layer = mask.boundary_layer_area();
    CHECK(layer < previous);
    CHECK(layer == doctest::Approx(1.0 - std::pow(1.0 - 2.0 * eps, 2)));
    previous = layer;
  }
}

TEST_CASE("incompatible eps / h ratios are configuration errors") {
  const auto cell = disc_cell(8);
  CHECK_THROWS_AS(DomainMask::build(cell, Rect{}, 0.25, 1.0 / 20), ConfigError);
  CHECK_THROWS_AS(DomainMask::build(cell, Rect{}, 0.25, 1.0 / 48), ConfigError);
  CHECK_THROWS_AS(DomainMask::build(cell, Rect{}, -0.25, 1.0 / 32), ConfigError);
  CHECK_THROWS_AS(DomainMask::build(nullptr, Rect{}, 0.25, 1.0 / 32), ConfigError);
}

TEST_CASE("centred disc in the unit square gives a mask with the square's symmetries") {
  const auto cell = disc_cell(8);
  const auto mask = DomainMask::build(cell, Rect{}, 0.125, 1.0 / 64);
  const auto& g = mask.grid();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      CHECK(mask.fluid(i, j) == mask.fluid(g.nx - 1 - i, j));
      CHECK(mask.fluid(i, j) == mask.fluid(i, g.ny - 1 - j));
      CHECK(mask.fluid(i, j) == mask.fluid(j, i));
    }
}

TEST_CASE("mask dump has a text header and one byte per cell") {
  const auto cell = disc_cell(8);
  const auto mask = DomainMask::build(cell, Rect{}, 0.25, 1.0 / 32);
  std::ostringstream out;
  mask.dump(out);
  const std::string s = out.str();
  const auto nl = s.find('\n');
  REQUIRE(nl != std::string::npos);
  std::istringstream header(s.substr(0, nl));
  std::string tag;
  int nx = 0, ny = 0;
  double h = 0.0;
  header >> tag >> nx >> ny >> h;
  CHECK(tag == "MASK");
  CHECK(nx == 32);
  CHECK(ny == 32);
  CHECK(h == doctest::Approx(1.0 / 32));
  REQUIRE(s.size() == nl + 1 + 32 * 32);
  for (int k = 0; k < 32 * 32; ++k) CHECK(static_cast<unsigned char>(s[nl + 1 + k]) == (mask.fluid(k) ? 1 : 0));
}

TEST_CASE("unperforated domain is all fluid") {
  const auto mask = unperforated(Rect{0.0, 0.0, 1.0, 0.5}, 1.0 / 16);
  CHECK(mask.grid().nx == 16);
  CHECK(mask.grid().ny == 8);
  CHECK(mask.fluid_cells() == 128);
  CHECK(!mask.has_cell());
}
