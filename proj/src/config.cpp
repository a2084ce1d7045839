#include "korteweg/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "korteweg/error.hpp"
#include "korteweg/io.hpp"

namespace korteweg {
namespace {

using json = nlohmann::json;

void allow_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ConfigError("unknown key '" + k + "' in " + std::string(section));
  }
}

template <class T>
T get(const json& obj, const char* key, T fallback, std::string_view section) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for '" + std::string(key) + "' in " + std::string(section));
  }
}

template <class T>
std::optional<T> get_opt(const json& obj, const char* key, std::string_view section) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get<T>(obj, key, T{}, section);
}

std::array<double, 2> get_pair(const json& obj, const char* key, std::array<double, 2> fallback,
                               std::string_view section) {
  if (!obj.contains(key)) return fallback;
  const auto v = get<std::vector<double>>(obj, key, {}, section);
  if (v.size() != 2) throw ConfigError(std::string(key) + " in " + std::string(section) + " needs two numbers");
  return {v[0], v[1]};
}

GrainShape parse_grain(const json& g) {
  const std::string type = get<std::string>(g, "type", "disc", "geometry.grain");
  if (type == "disc") {
    allow_keys(g, "geometry.grain", {"type", "center", "radius"});
    return DiscGrain{get_pair(g, "center", {0.5, 0.5}, "geometry.grain"), get<double>(g, "radius", 0.25, "geometry.grain")};
  }
  if (type == "square") {
    allow_keys(g, "geometry.grain", {"type", "center", "half_side"});
    return SquareGrain{get_pair(g, "center", {0.5, 0.5}, "geometry.grain"),
                       get<double>(g, "half_side", 0.2, "geometry.grain")};
  }
  if (type == "ellipse") {
    allow_keys(g, "geometry.grain", {"type", "center", "semi_x", "semi_y"});
    return EllipseGrain{get_pair(g, "center", {0.5, 0.5}, "geometry.grain"), get<double>(g, "semi_x", 0.3, "geometry.grain"),
                        get<double>(g, "semi_y", 0.2, "geometry.grain")};
  }
  throw ConfigError("unknown grain type '" + type + "'");
}

PressureFamily parse_law(const json& l) {
  const std::string type = get<std::string>(l, "type", "polytropic", "constitutive.law");
  if (type == "polytropic") {
    allow_keys(l, "constitutive.law", {"type", "coefficient", "exponent"});
    return PolytropicLaw{get<double>(l, "coefficient", 1.0, "constitutive.law"),
                         get<double>(l, "exponent", 2.0, "constitutive.law")};
  }
  if (type == "cubic") {
    allow_keys(l, "constitutive.law", {"type", "scale", "shift"});
    return CubicLaw{get<double>(l, "scale", 0.8, "constitutive.law"), get<double>(l, "shift", 0.5, "constitutive.law")};
  }
  if (type == "vdw") {
    allow_keys(l, "constitutive.law", {"type", "a", "b", "R", "T"});
    return VanDerWaalsLaw{get<double>(l, "a", 1.0, "constitutive.law"), get<double>(l, "b", 1.0, "constitutive.law"),
                          get<double>(l, "R", 1.0, "constitutive.law"), get<double>(l, "T", 0.2, "constitutive.law")};
  }
  throw ConfigError("unknown pressure law '" + type + "'");
}

FaceDensityRule parse_rule(const std::string& s) {
  if (s == "upwind") return FaceDensityRule::upwind;
  if (s == "arithmetic") return FaceDensityRule::arithmetic;
  if (s == "energy_consistent") return FaceDensityRule::energy_consistent;
  throw ConfigError("unknown face_density rule '" + s + "'");
}

InitialDatum parse_initial(const json& d) {
  constexpr std::string_view sec = "study.initial";
  InitialDatum init;
  const std::string type = get<std::string>(d, "type", "constant", sec);
  init.base = get<double>(d, "base", 1.0, sec);
  if (type == "constant") {
    allow_keys(d, sec, {"type", "base"});
    init.kind = InitialDatum::Kind::constant;
  } else if (type == "gaussian") {
    allow_keys(d, sec, {"type", "base", "amplitude", "center", "width"});
    init.kind = InitialDatum::Kind::gaussian;
    init.amplitude = get<double>(d, "amplitude", 0.1, sec);
    init.center = get_pair(d, "center", {0.5, 0.5}, sec);
    init.width = get<double>(d, "width", 0.1, sec);
    if (!(init.width > 0.0)) throw ConfigError("gaussian width must be > 0");
  } else if (type == "modes") {
    allow_keys(d, sec, {"type", "base", "modes"});
    init.kind = InitialDatum::Kind::modes;
    if (d.contains("modes")) {
      if (!d.at("modes").is_array()) throw ConfigError("study.initial.modes must be an array");
      for (const auto& m : d.at("modes")) {
        allow_keys(m, "study.initial.modes[]", {"kx", "ky", "amplitude"});
        init.modes.push_back({get<int>(m, "kx", 1, sec), get<int>(m, "ky", 0, sec), get<double>(m, "amplitude", 0.0, sec)});
      }
    }
  } else if (type == "noise") {
    allow_keys(d, sec, {"type", "base", "amplitude", "seed", "smoothing"});
    init.kind = InitialDatum::Kind::noise;
    init.amplitude = get<double>(d, "amplitude", 0.05, sec);
    init.seed = get<std::uint64_t>(d, "seed", 1, sec);
    init.smoothing = get<int>(d, "smoothing", 2, sec);
    if (init.smoothing < 0) throw ConfigError("noise smoothing must be >= 0");
  } else {
    throw ConfigError("unknown initial datum type '" + type + "'");
  }
  return init;
}

}  // namespace

double RunConfig::grid_h() const {
  if (h) return *h;
  return *std::min_element(eps.begin(), eps.end()) / m;
}

std::shared_ptr<const UnitCell> RunConfig::unit_cell() const {
  return std::make_shared<const UnitCell>(UnitCell::build(grain, m, annulus_radius));
}

double RunConfig::working_r_max(const CellField& rho0) const {
  if (r_max) return *r_max;
  double peak = 0.0;
  for (double v : rho0.raw()) peak = std::max(peak, v);
  if (std::holds_alternative<VanDerWaalsLaw>(family))
    return std::min(10.0 * peak, 0.999 * std::get<VanDerWaalsLaw>(family).b);
  return 10.0 * std::max(peak, rho_s);
}

PressureLaw RunConfig::pressure_law(double rmax) const { return make_pressure(family, gamma, rho_s, rmax); }

EnergyFunction RunConfig::energy(const PressureLaw& law) const { return energy_function(law, rho_ref, rho_min); }

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(root, "config", {"geometry", "constitutive", "kernel", "pore", "effective", "study"});
  RunConfig cfg;
  cfg.canonical = root.dump();
  cfg.hash = io::git_blob_sha1(cfg.canonical);
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& { return root.contains(name) ? root.at(name) : empty; };

  const json& geo = section("geometry");
  allow_keys(geo, "geometry", {"grain", "m", "annulus_radius", "omega", "eps", "h", "cell_solver", "dump_cell_fields"});
  if (geo.contains("grain")) cfg.grain = parse_grain(geo.at("grain"));
  cfg.m = get<int>(geo, "m", 8, "geometry");
  cfg.annulus_radius = get_opt<double>(geo, "annulus_radius", "geometry");
  if (geo.contains("omega")) {
    const auto o = get<std::vector<double>>(geo, "omega", {}, "geometry");
    if (o.size() != 4 || !(o[2] > o[0]) || !(o[3] > o[1]))
      throw ConfigError("geometry.omega must be [x0, y0, x1, y1] with x1 > x0 and y1 > y0");
    cfg.omega = {o[0], o[1], o[2], o[3]};
  }
  if (geo.contains("eps")) cfg.eps = get<std::vector<double>>(geo, "eps", {}, "geometry");
  if (cfg.eps.empty()) throw ConfigError("geometry.eps must list at least one value");
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw ConfigError("geometry.eps values must be > 0");
  cfg.h = get_opt<double>(geo, "h", "geometry");
  cfg.dump_cell_fields = get<bool>(geo, "dump_cell_fields", false, "geometry");
  if (geo.contains("cell_solver")) {
    const json& cs = geo.at("cell_solver");
    allow_keys(cs, "geometry.cell_solver", {"method", "tolerance", "max_iterations", "refine"});
    const std::string method = get<std::string>(cs, "method", "uzawa", "geometry.cell_solver");
    if (method == "uzawa") cfg.cell.method = StokesMethod::uzawa;
    else if (method == "direct") cfg.cell.method = StokesMethod::direct;
    else throw ConfigError("unknown cell solver method '" + method + "'");
    cfg.cell.tolerance = get<double>(cs, "tolerance", 1e-12, "geometry.cell_solver");
    cfg.cell.max_iterations = get<int>(cs, "max_iterations", 5000, "geometry.cell_solver");
    cfg.cell.refine = get<int>(cs, "refine", 1, "geometry.cell_solver");
  }

  const json& con = section("constitutive");
  allow_keys(con, "constitutive", {"law", "gamma", "rho_s", "rho_ref", "r_max", "rho_min", "check"});
  if (con.contains("law")) cfg.family = parse_law(con.at("law"));
  cfg.gamma = get<double>(con, "gamma", 0.0, "constitutive");
  cfg.rho_s = get<double>(con, "rho_s", 1.0, "constitutive");
  cfg.rho_ref = get<double>(con, "rho_ref", 1.0, "constitutive");
  cfg.r_max = get_opt<double>(con, "r_max", "constitutive");
  cfg.rho_min = get_opt<double>(con, "rho_min", "constitutive");
  if (con.contains("check")) {
    const json& ch = con.at("check");
    allow_keys(ch, "constitutive.check", {"r_max", "samples", "alpha", "tail_tolerance"});
    cfg.check.r_max = get<double>(ch, "r_max", 100.0, "constitutive.check");
    cfg.check.samples = get<int>(ch, "samples", 1000, "constitutive.check");
    cfg.check.alpha = get_opt<double>(ch, "alpha", "constitutive.check");
    cfg.check.tail_tolerance = get<double>(ch, "tail_tolerance", 0.05, "constitutive.check");
  }

  const json& ker = section("kernel");
  allow_keys(ker, "kernel", {"delta", "profile", "scale_with_eps"});
  cfg.delta = get<double>(ker, "delta", 0.1, "kernel");
  if (get<std::string>(ker, "profile", "bump", "kernel") != "bump") throw ConfigError("only the 'bump' kernel profile exists");
  if (get<bool>(ker, "scale_with_eps", false, "kernel"))
    throw ConfigError("kernel support is an Omega-scale constant and cannot scale with eps");

  const json& pore = section("pore");
  allow_keys(pore, "pore", {"mu", "xi", "eps", "T", "cfl", "tolerance", "output_every", "dt", "max_steps", "face_density"});
  cfg.pore.mu = get<double>(pore, "mu", 1.0, "pore");
  cfg.pore.xi = get<double>(pore, "xi", 0.0, "pore");
  cfg.pore_eps = get_opt<double>(pore, "eps", "pore");
  cfg.pore.eps = cfg.pore_eps.value_or(cfg.eps.front());
  cfg.pore.T = get<double>(pore, "T", 1.0, "pore");
  cfg.pore.cfl = get<double>(pore, "cfl", 0.4, "pore");
  cfg.pore.momentum_tolerance = get<double>(pore, "tolerance", 1e-10, "pore");
  cfg.pore.output_every = get<int>(pore, "output_every", 1, "pore");
  cfg.pore.fixed_dt = get_opt<double>(pore, "dt", "pore");
  cfg.pore.max_steps = get_opt<int>(pore, "max_steps", "pore");
  cfg.pore.face_density = parse_rule(get<std::string>(pore, "face_density", "energy_consistent", "pore"));
  cfg.pore.validate();

  const json& eff = section("effective");
  allow_keys(eff, "effective", {"theta", "A", "A_csv", "mu", "T", "cfl", "dt", "max_steps", "theta_override"});
  cfg.theta_given = eff.contains("theta");
  cfg.effective.theta = get<double>(eff, "theta", 0.8, "effective");
  cfg.effective.mu = get<double>(eff, "mu", cfg.pore.mu, "effective");
  cfg.effective.T = get<double>(eff, "T", cfg.pore.T, "effective");
  cfg.effective.cfl = get<double>(eff, "cfl", 0.4, "effective");
  cfg.effective.fixed_dt = get_opt<double>(eff, "dt", "effective");
  cfg.effective.max_steps = get_opt<int>(eff, "max_steps", "effective");
  cfg.effective.theta_override = get<bool>(eff, "theta_override", false, "effective");
  if (eff.contains("A") && eff.contains("A_csv")) throw ConfigError("give either effective.A or effective.A_csv");
  if (eff.contains("A")) {
    const auto a = get<std::vector<std::vector<double>>>(eff, "A", {}, "effective");
    if (a.size() != 2 || a[0].size() != 2 || a[1].size() != 2) throw ConfigError("effective.A must be a 2x2 array");
    cfg.effective.A = {{{a[0][0], a[0][1]}, {a[1][0], a[1][1]}}};
    cfg.A_given = true;
  }
  if (eff.contains("A_csv")) {
    std::filesystem::path p = get<std::string>(eff, "A_csv", "", "effective");
    cfg.A_csv = p.is_relative() ? base_dir / p : p;
  }

  const json& st = section("study");
  allow_keys(st, "study", {"initial", "T", "times", "rho_floor_factor", "dry_run_change", "threads", "snapshots"});
  if (st.contains("initial")) cfg.initial = parse_initial(st.at("initial"));
  cfg.T = get_opt<double>(st, "T", "study");
  cfg.n_times = get<int>(st, "times", 4, "study");
  cfg.rho_floor_factor = get<double>(st, "rho_floor_factor", 1e-3, "study");
  cfg.dry_run_change = get<double>(st, "dry_run_change", 0.05, "study");
  cfg.threads = get<int>(st, "threads", 1, "study");
  cfg.snapshots = get<int>(st, "snapshots", 0, "study");
  if (cfg.n_times < 1) throw ConfigError("study.times must be >= 1");
  if (cfg.threads < 1) throw ConfigError("study.threads must be >= 1");
  if (cfg.snapshots < 0) throw ConfigError("study.snapshots must be >= 0");
  if (cfg.T && !(*cfg.T > 0.0)) throw ConfigError("study.T must be > 0");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

StudyConfig make_study_config(const RunConfig& cfg) {
  StudyConfig s;
  s.cell = cfg.unit_cell();
  s.omega = cfg.omega;
  s.eps = cfg.eps;
  s.h = cfg.grid_h();
  const DomainMask full = unperforated(cfg.omega, s.h);
  const CellField rho0 = cfg.initial.evaluate(full.grid(), cfg.omega);
  const PressureLaw law = cfg.pressure_law(cfg.working_r_max(rho0));
  s.energy = cfg.energy(law);
  s.law = law;
  s.delta = cfg.delta;
  s.pore = cfg.pore;
  s.effective = cfg.effective;
  s.effective_coefficients_given = cfg.theta_given && cfg.A_given;
  s.cell_options = cfg.cell;
  s.initial = cfg.initial;
  s.T = cfg.T;
  s.n_times = cfg.n_times;
  s.rho_floor_factor = cfg.rho_floor_factor;
  s.dry_run_change = cfg.dry_run_change;
  s.threads = cfg.threads;
  return s;
}

}  // namespace korteweg
