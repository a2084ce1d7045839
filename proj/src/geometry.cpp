#include "korteweg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "korteweg/error.hpp"

namespace korteweg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

bool grain_contains(const GrainShape& shape, double x, double y) {
  return std::visit(
      overloaded{
          [&](const DiscGrain& d) {
            const double dx = x - d.center[0], dy = y - d.center[1];
            return dx * dx + dy * dy <= d.radius * d.radius;
          },
          [&](const SquareGrain& s) {
            return std::abs(x - s.center[0]) <= s.half_side && std::abs(y - s.center[1]) <= s.half_side;
          },
          [&](const EllipseGrain& e) {
            if (e.semi_x <= 0.0 || e.semi_y <= 0.0) return false;
            const double dx = (x - e.center[0]) / e.semi_x, dy = (y - e.center[1]) / e.semi_y;
            return dx * dx + dy * dy <= 1.0;
          }},
      shape);
}

double grain_area(const GrainShape& shape) {
  return std::visit(overloaded{[](const DiscGrain& d) { return std::numbers::pi * d.radius * d.radius; },
                               [](const SquareGrain& s) { return 4.0 * s.half_side * s.half_side; },
                               [](const EllipseGrain& e) { return std::numbers::pi * e.semi_x * e.semi_y; }},
                    shape);
}

std::array<double, 2> grain_center(const GrainShape& shape) {
  return std::visit([](const auto& g) { return g.center; }, shape);
}

double grain_circumradius(const GrainShape& shape) {
  return std::visit(overloaded{[](const DiscGrain& d) { return d.radius; },
                               [](const SquareGrain& s) { return s.half_side * std::numbers::sqrt2; },
                               [](const EllipseGrain& e) { return std::max(e.semi_x, e.semi_y); }},
                    shape);
}

std::string describe(const GrainShape& shape) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{[&](const DiscGrain& d) {
                          os << "disc(" << d.center[0] << "," << d.center[1] << ";r=" << d.radius << ")";
                        },
                        [&](const SquareGrain& s) {
                          os << "square(" << s.center[0] << "," << s.center[1] << ";a=" << s.half_side << ")";
                        },
                        [&](const EllipseGrain& e) {
                          os << "ellipse(" << e.center[0] << "," << e.center[1] << ";" << e.semi_x << ","
                             << e.semi_y << ")";
                        }},
             shape);
  return os.str();
}

double default_annulus_radius(const GrainShape& shape) {
  const auto c = grain_center(shape);
  const double wall = std::min({c[0], c[1], 1.0 - c[0], 1.0 - c[1]});
  const double rs = grain_circumradius(shape);
  const double r = std::min(rs + 0.15, 0.45);
  if (r > rs) return r;
  return 0.5 * (rs + wall);
}

UnitCell UnitCell::build(const GrainShape& shape, int m, std::optional<double> annulus_radius) {
  if (m < 4) throw ConfigError("unit cell resolution m must be at least 4");

  UnitCell cell;
  cell.shape_ = shape;
  cell.m_ = m;
  cell.solid_.assign(static_cast<std::size_t>(m) * m, 0);
  cell.annulus_.assign(static_cast<std::size_t>(m) * m, 0);

  const double h = 1.0 / m;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (grain_contains(shape, (i + 0.5) * h, (j + 0.5) * h)) {
        cell.solid_[cell.index(i, j)] = 1;
        ++cell.solid_count_;
      }
    }
  }
  if (cell.solid_count_ == 0) throw ConfigError("empty solid grain");

  // The grain must keep two grid cells of fluid to the cell boundary so the
  // periodic continuation stays smooth.
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (cell.solid(i, j) && (i < 2 || j < 2 || i > m - 3 || j > m - 3))
        throw ConfigError("solid grain touches the unit cell boundary");
    }
  }

  const auto c = grain_center(shape);
  const double wall = std::min({c[0], c[1], 1.0 - c[0], 1.0 - c[1]});
  const double rr = annulus_radius.value_or(default_annulus_radius(shape));
  if (!(rr > grain_circumradius(shape))) throw ConfigError("annulus radius must exceed the grain radius");
  if (!(rr < wall)) throw ConfigError("annulus region must lie strictly inside the unit cell");
  cell.annulus_radius_ = rr;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const double dx = (i + 0.5) * h - c[0], dy = (j + 0.5) * h - c[1];
      if (!cell.solid(i, j) && dx * dx + dy * dy < rr * rr) {
        cell.annulus_[cell.index(i, j)] = 1;
        ++cell.annulus_count_;
      }
    }
  }

  std::ostringstream fp;
  fp.precision(17);
  fp << describe(shape) << ";m=" << m << ";rr=" << rr;
  cell.fingerprint_ = fp.str();
  return cell;
}

double Rect::diameter() const { return std::hypot(width(), height()); }

int require_integer(double x, const char* what) {
  const double r = std::round(x);
  if (!(std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))))
    throw ConfigError(std::string(what) + " must be an integer (got " + std::to_string(x) + ")");
  return static_cast<int>(r);
}

DomainMask DomainMask::build(std::shared_ptr<const UnitCell> cell, const Rect& omega, double eps,
                             std::optional<double> h_opt) {
  if (!cell) throw ConfigError("perforated domain needs a unit cell");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(omega.width() > 0.0 && omega.height() > 0.0)) throw ConfigError("Omega must have positive extent");

  const int m = cell->resolution();
  const double h = h_opt.value_or(eps / m);
  const int per_copy = require_integer(eps / h, "eps/h");
  if (per_copy % m != 0)
    throw ConfigError("eps/h must be an integer multiple of the unit-cell resolution m");

  DomainMask mask;
  mask.cell_ = std::move(cell);
  mask.omega_ = omega;
  mask.eps_ = eps;
  mask.cells_per_copy_ = per_copy;
  mask.block_ = per_copy / m;
  mask.grid_ = GridSpec{require_integer(omega.width() / h, "Omega width / h"),
                        require_integer(omega.height() / h, "Omega height / h"), h, omega.x0, omega.y0};
  const int ox = require_integer(omega.x0 / h, "Omega x0 / h");
  const int oy = require_integer(omega.y0 / h, "Omega y0 / h");

  const GridSpec& g = mask.grid_;
  mask.fluid_.assign(g.cells(), 1);
  mask.annulus_.assign(g.cells(), 0);
  mask.copy_.assign(g.cells(), -1);

  // Copy k covers global lattice cells [k*per_copy, (k+1)*per_copy) and Omega
  // covers [origin, origin + n). Interior copies start strictly after the
  // near wall and end strictly before the far wall.
  if (ox < 0 || oy < 0) throw ConfigError("Omega must lie in the first quadrant");
  auto interior_range = [per_copy](int origin, int n) {
    const int lo = origin / per_copy + 1;
    const int hi = (origin + n + per_copy - 1) / per_copy - 2;
    return std::array<int, 2>{lo, hi};
  };
  const auto rx = interior_range(ox, g.nx);
  const auto ry = interior_range(oy, g.ny);

  for (int ky = ry[0]; ky <= ry[1]; ++ky) {
    for (int kx = rx[0]; kx <= rx[1]; ++kx) {
      const int id = static_cast<int>(mask.copies_.size());
      mask.copies_.push_back({kx, ky});
      const int i0 = kx * per_copy - ox, j0 = ky * per_copy - oy;
      for (int lj = 0; lj < per_copy; ++lj) {
        for (int li = 0; li < per_copy; ++li) {
          const std::size_t k = g.index(i0 + li, j0 + lj);
          mask.copy_[k] = id;
          const int ci = li / mask.block_, cj = lj / mask.block_;
          if (mask.cell_->solid(ci, cj)) mask.fluid_[k] = 0;
          if (mask.cell_->annulus(ci, cj)) mask.annulus_[k] = 1;
        }
      }
    }
  }
  mask.fluid_count_ = static_cast<std::size_t>(std::count(mask.fluid_.begin(), mask.fluid_.end(), 1));
  return mask;
}

DomainMask unperforated(const Rect& omega, double h) {
  if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
  DomainMask mask;
  mask.omega_ = omega;
  mask.eps_ = std::numeric_limits<double>::infinity();
  mask.grid_ = GridSpec{require_integer(omega.width() / h, "Omega width / h"),
                        require_integer(omega.height() / h, "Omega height / h"), h, omega.x0, omega.y0};
  mask.fluid_.assign(mask.grid_.cells(), 1);
  mask.annulus_.assign(mask.grid_.cells(), 0);
  mask.copy_.assign(mask.grid_.cells(), -1);
  mask.fluid_count_ = mask.grid_.cells();
  return mask;
}

double DomainMask::omega_k_area() const {
  const std::size_t n = static_cast<std::size_t>(std::count_if(copy_.begin(), copy_.end(), [](int c) { return c >= 0; }));
  return n * grid_.cell_area();
}

double DomainMask::omega_k_fluid_area() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < copy_.size(); ++k)
    if (copy_[k] >= 0 && fluid_[k]) ++n;
  return n * grid_.cell_area();
}

double DomainMask::boundary_layer_area() const {
  return grid_.cells() * grid_.cell_area() - omega_k_area();
}

double DomainMask::measured_porosity() const {
  const double ak = omega_k_area();
  if (ak <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return omega_k_fluid_area() / ak;
}

void DomainMask::dump(std::ostream& out) const {
  std::ostringstream header;
  header.precision(17);
  header << "MASK " << grid_.nx << " " << grid_.ny << " " << grid_.h << "\n";
  out << header.str();
  out.write(reinterpret_cast<const char*>(fluid_.data()), static_cast<std::streamsize>(fluid_.size()));
}

}  // namespace korteweg
