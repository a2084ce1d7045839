#include "korteweg/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>
#include <openssl/opensslv.h>

#include "korteweg/config.hpp"
#include "korteweg/error.hpp"
#include "korteweg/io.hpp"
#include "korteweg/nonlocal.hpp"
#include "korteweg/simd/stencil.hpp"

#ifndef KORTEWEG_VERSION
#define KORTEWEG_VERSION "0.0.0"
#endif

namespace korteweg::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using io::format_double;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_int(long long v) { return std::to_string(v); }

/// Output directory bookkeeping plus the manifest written at the end.
class RunOutput {
 public:
  RunOutput(fs::path dir, std::string command, const RunConfig& cfg, const fs::path& config_path)
      : dir_(std::move(dir)), cfg_(cfg) {
    fs::create_directories(dir_);
    manifest_["command"] = std::move(command);
    manifest_["config_path"] = config_path.string();
    manifest_["config_hash"] = cfg.hash;
    manifest_["config"] = nlohmann::json::parse(cfg.canonical);
    manifest_["versions"] = {
        {"korteweg", KORTEWEG_VERSION},
        {"compiler", __VERSION__},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"openssl", OPENSSL_VERSION_TEXT},
    };
    manifest_["simd"] = simd::isa_name(simd::active_isa());
    manifest_["outputs"] = nlohmann::json::array();
    manifest_["timings"] = nlohmann::json::object();
  }

  std::ofstream open(const std::string& name, bool binary = false) {
    std::ofstream f(dir_ / name, binary ? std::ios::binary : std::ios::out | std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    manifest_["outputs"].push_back(name);
    return f;
  }

  void timing(const std::string& key, double seconds) { manifest_["timings"][key] = seconds; }
  nlohmann::json& manifest() { return manifest_; }
  const std::string& hash() const { return cfg_.hash; }

  void write_field(const std::string& file, std::string_view name, const CellField& f, double t,
                   std::string_view comment) {
    auto out = open(file, true);
    io::write_field(out, name, f, t, comment);
  }

  void finish(int status, const std::string& message) {
    manifest_["status"] = status;
    if (!message.empty()) manifest_["message"] = message;
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << manifest_.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  const RunConfig& cfg_;
  nlohmann::json manifest_;
};

std::vector<double> snapshot_times(double T, int n) {
  std::vector<double> t;
  for (int j = 1; j <= n; ++j) t.push_back(T * j / n);
  return t;
}

std::string snapshot_name(const std::string& stem, int j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d.field", stem.c_str(), j);
  return buf;
}

void write_face_field(RunOutput& out, const std::string& stem, const FaceField& v, double t,
                      const std::string& comment) {
  const auto& g = v.grid();
  io::FieldFile fx{stem + "_x", v.xface_nx(), g.ny, g.h, t, comment, v.xs()};
  io::FieldFile fy{stem + "_y", g.nx, v.yface_ny(), g.h, t, comment, v.ys()};
  auto ox = out.open(stem + "_x.field", true);
  io::write_field(ox, fx);
  auto oy = out.open(stem + "_y.field", true);
  io::write_field(oy, fy);
}

Matrix2 read_permeability_csv(const fs::path& path, double& theta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open permeability CSV " + path.string());
  io::CsvTable t;
  try {
    t = io::read_csv(in);
  } catch (const std::exception& e) {
    throw ConfigError("malformed permeability CSV " + path.string() + ": " + e.what());
  }
  Matrix2 A{};
  try {
    const auto cj = t.column("j");
    const auto c1 = t.column("A_j1");
    const auto c2 = t.column("A_j2");
    const auto ct = t.column("theta");
    if (t.rows.size() != 2) throw ConfigError("permeability CSV needs exactly two rows");
    for (const auto& row : t.rows) {
      const int j = std::stoi(row.at(cj));
      if (j < 1 || j > 2) throw ConfigError("permeability CSV row index out of range");
      A[j - 1][0] = std::stod(row.at(c1));
      A[j - 1][1] = std::stod(row.at(c2));
      theta = std::stod(row.at(ct));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("malformed permeability CSV " + path.string() + ": " + e.what());
  }
  return A;
}

int cmd_cell(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const auto t0 = Clock::now();
  const auto cell = cfg.unit_cell();
  const auto s1 = solve_cell_problem(*cell, 0, cfg.cell);
  const auto s2 = solve_cell_problem(*cell, 1, cfg.cell);
  const auto perm = permeability_from(s1, s2, cfg.cell.tolerance);
  out.timing("cell_solve", seconds_since(t0));

  {
    auto f = out.open("permeability.csv");
    io::CsvWriter w(f, {"config_hash", "j", "A_j1", "A_j2", "theta"});
    for (int j = 0; j < 2; ++j)
      w.row({out.hash(), fmt_int(j + 1), format_double(perm.A[j][0]), format_double(perm.A[j][1]),
             format_double(cell->porosity())});
  }
  {
    auto f = out.open("cell_report.csv");
    io::CsvWriter w(f, {"config_hash", "quantity", "value"});
    const auto ev = perm.eigenvalues();
    const std::vector<std::pair<std::string, double>> rows = {
        {"resolution", perm.resolution},
        {"theta", cell->porosity()},
        {"theta_analytic", cell->analytic_porosity()},
        {"tolerance", perm.tolerance},
        {"divergence_residual_1", perm.divergence_residual[0]},
        {"divergence_residual_2", perm.divergence_residual[1]},
        {"momentum_residual_1", perm.momentum_residual[0]},
        {"momentum_residual_2", perm.momentum_residual[1]},
        {"iterations_1", s1.iterations},
        {"iterations_2", s2.iterations},
        {"asymmetry", perm.asymmetry()},
        {"eigenvalue_min", ev[0]},
        {"eigenvalue_max", ev[1]},
    };
    for (const auto& [k, v] : rows) w.row({out.hash(), k, format_double(v)});
  }
  if (cfg.dump_cell_fields) {
    for (const auto* s : {&s1, &s2}) {
      const std::string tag = "cell" + std::to_string(s->index + 1);
      write_face_field(out, "v" + std::to_string(s->index + 1), s->v, 0.0, tag + " periodic unit cell velocity");
      out.write_field("q" + std::to_string(s->index + 1) + ".field", "q" + std::to_string(s->index + 1), s->q, 0.0,
                      tag + " periodic unit cell pressure");
    }
  }
  out.manifest()["theta"] = cell->porosity();
  log << "A = [[" << perm.A[0][0] << ", " << perm.A[0][1] << "], [" << perm.A[1][0] << ", " << perm.A[1][1]
      << "]], theta = " << cell->porosity() << '\n';
  return ok;
}

int cmd_pore(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const double h = cfg.grid_h();
  const double eps = cfg.pore.eps;
  const DomainMask mask = DomainMask::build(cfg.unit_cell(), cfg.omega, eps, h);
  const Kernel kernel = Kernel::make(cfg.delta, h);
  const CellField rho0 = cfg.initial.evaluate(mask.grid(), cfg.omega);
  const PressureLaw law = cfg.pressure_law(cfg.working_r_max(rho0));
  const EnergyFunction energy = cfg.energy(law);
  {
    auto f = out.open("mask.bin", true);
    mask.dump(f);
  }
  const auto times = snapshot_times(cfg.pore.T, cfg.snapshots);
  const auto t0 = Clock::now();
  PoreRun run;
  std::string failure;
  int status = ok;
  try {
    run = run_pore(rho0, cfg.pore, mask, kernel, energy, times);
  } catch (const SolverError& e) {
    failure = e.what();
    status = solver_failure;
  }
  out.timing("pore_run", seconds_since(t0));

  auto f = out.open("pore_diagnostics.csv");
  io::CsvWriter w(f, {"config_hash", "step", "t", "dt", "mass", "E_fluid_fluid", "E_fluid_solid", "E_bulk", "E_total",
                      "D", "residual", "max_u"});
  for (const auto& r : run.rows)
    w.row({out.hash(), fmt_int(r.step), format_double(r.t), format_double(r.dt), format_double(r.mass),
           format_double(r.energy.fluid_fluid), format_double(r.energy.fluid_solid), format_double(r.energy.bulk),
           format_double(r.energy.total()), format_double(r.dissipation), format_double(r.residual),
           format_double(r.max_u)});
  for (std::size_t j = 0; j < run.snapshots.size(); ++j) {
    const auto& s = run.snapshots[j];
    out.write_field(snapshot_name("rho", static_cast<int>(j + 1)), "rho", s.rho, s.t,
                    "pore density eps=" + format_double(eps));
  }
  out.manifest()["steps"] = run.steps;
  out.manifest()["eps"] = eps;
  out.manifest()["max_energy_increase"] = run.max_energy_increase;
  if (status != ok) {
    out.manifest()["failure"] = failure;
    throw SolverError(failure);
  }
  log << "pore: " << run.steps << " steps, max energy residual " << run.max_residual << '\n';
  return ok;
}

/// theta and A from the config, from a cell CSV, or from a fresh cell solve.
void resolve_effective_coefficients(const RunConfig& cfg, EffectiveConfig& ecfg, RunOutput& out) {
  std::string source = "config";
  if (cfg.A_csv) {
    double theta = 0.0;
    ecfg.A = read_permeability_csv(*cfg.A_csv, theta);
    if (!cfg.theta_given) ecfg.theta = theta;
    source = "csv";
  } else if (!cfg.A_given || !cfg.theta_given) {
    const auto t0 = Clock::now();
    const auto cell = cfg.unit_cell();
    const auto perm = permeability(*cell, cfg.cell);
    out.timing("cell_solve", seconds_since(t0));
    if (!cfg.A_given) ecfg.A = perm.A;
    if (!cfg.theta_given) ecfg.theta = cell->porosity();
    source = "cell_problem";
  }
  out.manifest()["coefficients"] = {{"source", source},
                                    {"theta", ecfg.theta},
                                    {"A", {{ecfg.A[0][0], ecfg.A[0][1]}, {ecfg.A[1][0], ecfg.A[1][1]}}}};
}

int cmd_effective(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const double h = cfg.grid_h();
  const DomainMask full = unperforated(cfg.omega, h);
  const Kernel kernel = Kernel::make(cfg.delta, h);
  const CellField rho0 = cfg.initial.evaluate(full.grid(), cfg.omega);
  const PressureLaw law = cfg.pressure_law(cfg.working_r_max(rho0));
  EffectiveConfig ecfg = cfg.effective;
  resolve_effective_coefficients(cfg, ecfg, out);
  ecfg.validate();
  out.manifest()["theta_override"] = ecfg.theta_override;

  const auto times = snapshot_times(ecfg.T, cfg.snapshots);
  const auto t0 = Clock::now();
  const auto run = run_effective(rho0, ecfg, full, kernel, law, times);
  out.timing("effective_run", seconds_since(t0));

  auto f = out.open("effective_diagnostics.csv");
  io::CsvWriter w(f, {"config_hash", "step", "t", "dt", "mass", "max_J", "bimodality"});
  for (const auto& r : run.rows)
    w.row({out.hash(), fmt_int(r.step), format_double(r.t), format_double(r.dt), format_double(r.mass),
           format_double(r.max_J), format_double(r.bimodality)});
  for (std::size_t j = 0; j < run.snapshots.size(); ++j) {
    const auto& s = run.snapshots[j];
    out.write_field(snapshot_name("rho", static_cast<int>(j + 1)), "rho", s.rho, s.t,
                    "effective density theta=" + format_double(ecfg.theta));
  }
  out.manifest()["steps"] = run.steps;
  log << "effective: " << run.steps << " steps\n";
  return ok;
}

int cmd_compare(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const StudyConfig scfg = make_study_config(cfg);
  const auto t0 = Clock::now();
  const ConvergenceReport rep = convergence_study(scfg);
  out.timing("study", seconds_since(t0));
  out.timing("cell_solve", rep.cell_seconds);
  out.timing("effective_run", rep.effective_seconds);
  for (const auto& r : rep.rows) out.timing("pore_run_eps_" + format_double(r.eps), r.seconds);

  const std::string& hash = out.hash();
  {
    auto f = out.open("convergence.csv");
    io::CsvWriter w(f, {"config_hash", "eps", "e_rho", "darcy_residual", "steps"});
    for (const auto& r : rep.rows)
      w.row({hash, format_double(r.eps), format_double(r.e_rho), format_double(r.darcy_residual), fmt_int(r.steps)});
  }
  {
    auto f = out.open("errors_by_time.csv");
    io::CsvWriter w(f, {"config_hash", "eps", "t", "e_rho", "darcy_residual"});
    for (const auto& r : rep.rows)
      for (std::size_t j = 0; j < r.e_rho_at.size(); ++j)
        w.row({hash, format_double(r.eps), format_double(rep.times[j]), format_double(r.e_rho_at[j]),
               format_double(r.darcy_at[j])});
  }
  {
    auto f = out.open("apriori.csv");
    io::CsvWriter w(f, {"config_hash", "eps", "u_over_eps2_l2l2", "u_over_eps_l2h1", "sup_w_integral", "sup_rho_l2",
                        "mass_variation"});
    for (const auto& r : rep.rows) {
      const auto& a = r.apriori;
      w.row({hash, format_double(a.eps), format_double(a.u_over_eps2_l2l2), format_double(a.u_over_eps_l2h1),
             format_double(a.sup_w_integral), format_double(a.sup_rho_l2), format_double(a.mass_variation)});
    }
  }
  {
    auto f = out.open("poincare.csv");
    io::CsvWriter w(f, {"config_hash", "eps", "max_ratio", "min_ratio", "used", "skipped"});
    for (const auto& r : rep.rows) {
      const auto& p = r.poincare;
      w.row({hash, format_double(p.eps), format_double(p.max_ratio), format_double(p.min_ratio), fmt_int(p.used),
             fmt_int(p.skipped)});
    }
  }
  {
    const double h = scfg.h;
    const DomainMask full = unperforated(cfg.omega, h);
    const CellField f0 = cfg.initial.evaluate(full.grid(), cfg.omega);
    const auto t1 = Clock::now();
    const auto rows = homogenized_convergence_check(f0, scfg.cell, cfg.omega, cfg.eps, Kernel::make(cfg.delta, h),
                                                    cfg.rho_s);
    out.timing("convolution_check", seconds_since(t1));
    auto f = out.open("convolution_check.csv");
    io::CsvWriter w(f, {"config_hash", "eps", "theta", "error", "eps_below_delta"});
    for (const auto& r : rows)
      w.row({hash, format_double(r.eps), format_double(r.theta), format_double(r.error),
             r.eps <= cfg.delta ? "1" : "0"});
  }

  const std::vector<std::pair<std::string, bool>> contracts = {
      {"e_rho strictly decreasing", rep.e_rho_decreasing()},
      {"darcy residual strictly decreasing", rep.darcy_decreasing()},
      {"a-priori columns within 2x of coarsest eps", rep.apriori_uniform(2.0)},
      {"poincare spread below 50%", rep.poincare_spread() < 0.5},
  };
  {
    auto f = out.open("contracts.csv");
    io::CsvWriter w(f, {"config_hash", "contract", "pass"});
    for (const auto& [name, pass] : contracts) w.row({hash, name, pass ? "true" : "false"});
  }
  out.manifest()["T"] = rep.T;
  out.manifest()["theta"] = rep.theta;
  out.manifest()["complete"] = rep.complete;
  if (!rep.complete) throw SolverError("study incomplete: " + rep.failure);
  bool all = true;
  for (const auto& [name, pass] : contracts) {
    log << (pass ? "ok      " : "VIOLATED") << "  " << name << '\n';
    all = all && pass;
  }
  return all ? ok : contract_violation;
}

int cmd_check_pressure(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const PressureLaw law = cfg.pressure_law(cfg.r_max.value_or(cfg.check.r_max));
  const auto rep =
      check_admissibility(law, cfg.check.r_max, cfg.check.samples, cfg.check.alpha, cfg.check.tail_tolerance);
  auto f = out.open("admissibility.csv");
  io::CsvWriter w(f, {"config_hash", "item", "measured", "bound", "pass", "note"});
  std::size_t width = 4;
  for (const auto& it : rep.items) width = std::max(width, it.item.size());
  log << "law: " << law.name() << ", r in [0, " << rep.r_max << "], " << rep.samples << " samples\n";
  if (const auto& sp = law.spinodal()) log << "spinodal: [" << sp->first << ", " << sp->second << "]\n";
  log << std::left << std::setw(static_cast<int>(width)) << "item" << "  " << std::setw(14) << "measured"
      << std::setw(14) << "bound" << "pass\n";
  for (const auto& it : rep.items) {
    w.row({out.hash(), it.item, format_double(it.measured), format_double(it.bound), it.pass ? "true" : "false",
           it.note});
    log << std::left << std::setw(static_cast<int>(width)) << it.item << "  " << std::setw(14) << it.measured
        << std::setw(14) << it.bound << (it.pass ? "yes" : "NO") << '\n';
  }
  log << "verdict: " << rep.verdict << '\n';
  out.manifest()["verdict"] = rep.verdict;
  return ok;
}

}  // namespace

int run_command(const std::string& command, const fs::path& config, const fs::path& out_dir, std::ostream& log,
                std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  }
  std::unique_ptr<RunOutput> out;
  try {
    out = std::make_unique<RunOutput>(out_dir, command, cfg, config);
  } catch (const std::exception& e) {
    err << "cannot prepare output directory: " << e.what() << '\n';
    return unexpected;
  }
  const auto t0 = Clock::now();
  int status = unexpected;
  std::string message;
  try {
    if (command == "cell") status = cmd_cell(cfg, *out, log);
    else if (command == "pore") status = cmd_pore(cfg, *out, log);
    else if (command == "effective") status = cmd_effective(cfg, *out, log);
    else if (command == "compare") status = cmd_compare(cfg, *out, log);
    else if (command == "check-pressure") status = cmd_check_pressure(cfg, *out, log);
    else throw ConfigError("unknown command '" + command + "'");
    if (status == contract_violation) message = "contract violation";
  } catch (const ConfigError& e) {
    status = config_error, message = e.what();
  } catch (const PreconditionError& e) {
    status = config_error, message = e.what();
  } catch (const SolverError& e) {
    status = solver_failure, message = e.what();
  } catch (const RangeError& e) {
    status = solver_failure, message = e.what();
  } catch (const ContractViolation& e) {
    status = contract_violation, message = e.what();
  } catch (const std::exception& e) {
    status = unexpected, message = e.what();
  }
  out->timing("total", seconds_since(t0));
  out->finish(status, message);
  if (status != ok) err << command << ": " << message << '\n';
  return status;
}

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal Korteweg flow in porous media: pore-scale and homogenized solvers"};
  app.require_subcommand(1);
  std::string config;
  std::string out = ".";
  for (const char* name : {"cell", "pore", "effective", "compare", "check-pressure"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (created if missing)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return run_command(command, config, out, std::cout, std::cerr);
}

}  // namespace korteweg::cli
