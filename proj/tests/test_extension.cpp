#include <doctest.h>

#include <cmath>

#include "korteweg/error.hpp"
#include "korteweg/extension.hpp"
#include "support.hpp"

using namespace korteweg;

namespace {

std::shared_ptr<const UnitCell> disc_cell(int m = 16, double r = 0.25) {
  return std::make_shared<const UnitCell>(UnitCell::build(DiscGrain{{0.5, 0.5}, r}, m));
}

}  // namespace

TEST_CASE("zero extension examples") {
  const auto mask = DomainMask::build(disc_cell(), Rect{}, 0.25, 1.0 / 64);
  const auto one = zero_extend(CellField(mask.grid(), 1.0), mask);
  CHECK(one.kind == ExtensionKind::zero);
  CHECK(one.eps == 0.25);
  for (std::size_t k = 0; k < one.values.size(); ++k) CHECK(one.values[k] == (mask.fluid(k) ? 1.0 : 0.0));

  testing::Gen gen(91);
  const auto f = gen.field(mask.grid(), -1.0, 2.0);
  const auto z = zero_extend(f, mask);
  double fluid_sum = 0.0, ext_sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (mask.fluid(k)) fluid_sum += f[k];
    ext_sum += z.values[k];
    if (mask.fluid(k)) CHECK(z.values[k] == f[k]);
  }
  CHECK(ext_sum == doctest::Approx(fluid_sum).epsilon(1e-14));
  const auto back = restrict_to_fluid(z.values, mask);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == (mask.fluid(k) ? f[k] : 0.0));
}

TEST_CASE("mean-value extension of a constant is the constant") {
  const auto mask = DomainMask::build(disc_cell(), Rect{}, 0.125, 1.0 / 128);
  for (double c : {0.0, 0.37, 5.0}) {
    const auto e = mean_value_extend(CellField(mask.grid(), c), mask);
    CHECK(e.kind == ExtensionKind::mean_value);
    for (double v : e.values.raw()) CHECK(v == doctest::Approx(c).epsilon(1e-14));
  }
}

TEST_CASE("mean-value extension of one copy's indicator") {
  const auto cell = disc_cell();
  const auto mask = DomainMask::build(cell, Rect{}, 0.25, 1.0 / 64);
  REQUIRE(!mask.copies().empty());
  const int target = 0;
  CellField f(mask.grid(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (mask.copy_of(k) == target && mask.fluid(k)) f[k] = 1.0;
  const auto e = mean_value_extend(f, mask);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const bool mine = mask.copy_of(k) == target;
    CHECK(e.values[k] == doctest::Approx(mine ? 1.0 : 0.0));
  }
}

TEST_CASE("mean-value extension of x equals the annulus centroid") {
  const auto cell = disc_cell(16);
  const double eps = 0.125;
  const auto mask = DomainMask::build(cell, Rect{}, eps, eps / 16);
  const auto& g = mask.grid();
  CellField f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) f(i, j) = g.xc(i);
  const auto e = mean_value_extend(f, mask);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (mask.fluid(i, j)) continue;
      // the annulus is a ring around the grain centre, so its centroid is the copy centre
      const double centre = eps * (std::floor(g.xc(i) / eps) + 0.5);
      CHECK(std::abs(e.values(i, j) - centre) <= g.h);
    }
}

TEST_CASE("mean-value extension restricts back to the source and is linear") {
  testing::Gen gen(93);
  const auto mask = DomainMask::build(disc_cell(), Rect{}, 0.125, 1.0 / 128);
  const auto f = gen.field(mask.grid(), 0.0, 1.0), g = gen.field(mask.grid(), -1.0, 1.0);
  const double a = gen.uniform(-2.0, 2.0), b = gen.uniform(-2.0, 2.0);
  CellField mix(mask.grid());
  for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = a * f[k] + b * g[k];
  const auto ef = mean_value_extend(f, mask), eg = mean_value_extend(g, mask), em = mean_value_extend(mix, mask);
  const auto zf = zero_extend(f, mask), zg = zero_extend(g, mask), zm = zero_extend(mix, mask);
  for (std::size_t k = 0; k < mix.size(); ++k) {
    if (mask.fluid(k)) CHECK(ef.values[k] == f[k]);
    CHECK(std::abs(em.values[k] - (a * ef.values[k] + b * eg.values[k])) <= 1e-12);
    CHECK(std::abs(zm.values[k] - (a * zf.values[k] + b * zg.values[k])) <= 1e-12);
  }
}

TEST_CASE("under-resolved annulus is a configuration error") {
  // at m = 8 a thin annulus around r = 0.3 contains no cell centres
  const auto cell = std::make_shared<const UnitCell>(UnitCell::build(DiscGrain{{0.5, 0.5}, 0.3}, 8, 0.31));
  const auto mask = DomainMask::build(cell, Rect{}, 0.25, 1.0 / 32);
  CHECK_THROWS_AS(mean_value_extend(CellField(mask.grid(), 1.0), mask), ConfigError);
}

TEST_CASE("provenance names the extension and the source") {
  const auto mask = DomainMask::build(disc_cell(), Rect{}, 0.25, 1.0 / 64);
  const auto z = zero_extend(CellField(mask.grid(), 1.0), mask);
  const auto m = mean_value_extend(CellField(mask.grid(), 1.0), mask);
  CHECK(z.provenance().find("zero") != std::string::npos);
  CHECK(m.provenance().find("mean_value") != std::string::npos);
  CHECK(z.provenance().find('\n') == std::string::npos);
}

TEST_CASE("strictly decreasing error lists with a floor") {
  CHECK(strictly_decreasing({3.0, 2.0, 1.0}));
  CHECK(!strictly_decreasing({3.0, 3.0, 1.0}));
  CHECK(!strictly_decreasing({1.0, 2.0}));
  CHECK(strictly_decreasing({0.0, 0.0, 0.0}));
  CHECK(strictly_decreasing({1.0, 1e-14, 1e-15}));
}

TEST_CASE("weak limits of extensions converge together") {
  const auto cell = disc_cell(8);
  const double h = 1.0 / 128;
  std::vector<DomainMask> masks;
  for (double eps : {0.25, 0.125, 0.0625}) masks.push_back(DomainMask::build(cell, Rect{}, eps, h));
  const auto tests = default_test_functions(Rect{});
  REQUIRE(tests.size() == 6);
  const double theta = cell->porosity();

  SUBCASE("constant family") {
    std::vector<std::pair<const DomainMask*, CellField>> family;
    for (const auto& m : masks) family.emplace_back(&m, CellField(m.grid(), 1.0));
    const auto rep = weak_limit_check(family, CellField(masks[0].grid(), 1.0), theta, tests);
    CHECK(rep.all_coupled());
    CHECK(rep.all_converging());
    for (const auto& s : rep.series)
      for (const auto& e : s.entries) CHECK(e.a_error <= 1e-13);
  }
  SUBCASE("restrictions of a smooth field") {
    CellField G(masks[0].grid());
    for (int j = 0; j < G.grid().ny; ++j)
      for (int i = 0; i < G.grid().nx; ++i)
        G(i, j) = 1.0 + 0.5 * std::sin(3.0 * G.grid().xc(i)) * std::exp(-G.grid().yc(j));
    std::vector<std::pair<const DomainMask*, CellField>> family;
    for (const auto& m : masks) family.emplace_back(&m, restrict_to_fluid(G, m));
    const auto rep = weak_limit_check(family, G, theta, tests);
    CHECK(rep.all_coupled());
    CHECK(rep.all_converging());
  }
  SUBCASE("quadrature reproduces closed forms") {
    const CellField one(masks[0].grid(), 1.0);
    CHECK(integrate(one, tests[0]) == doctest::Approx(1.0));
    CHECK(integrate(one, tests[1]) == doctest::Approx(0.5));
    CHECK(integrate(one, tests[3]) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  }
  SUBCASE("mismatched grids are rejected") {
    const auto other = DomainMask::build(cell, Rect{}, 0.25, 1.0 / 64);
    std::vector<std::pair<const DomainMask*, CellField>> family;
    family.emplace_back(&other, CellField(other.grid(), 1.0));
    CHECK_THROWS(weak_limit_check(family, CellField(masks[0].grid(), 1.0), theta, tests));
  }
}
