#include "flrw/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "flrw/cli/validation.hpp"
#include "flrw/diagnostics.hpp"
#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"
#include "flrw/kernels.hpp"
#include "flrw/report.hpp"
#include "flrw/solver.hpp"

namespace flrw::cli {

namespace fs = std::filesystem;

namespace {

// Files written so far plus the stage reached; MANIFEST is always written last.
class Manifest {
 public:
  Manifest(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return f;
  }
  void stage(std::string s) { stage_ = std::move(s); }
  const std::string& stage() const { return stage_; }

  void finish(const std::string& status) const {
    std::ofstream m(dir_ / "MANIFEST");
    m << version_string() << '\n' << "command " << command_ << '\n';
    for (const auto& f : files_) m << f << '\n';
    m << "status " << status << '\n';
  }

 private:
  fs::path dir_;
  std::string command_;
  std::string stage_ = "setup";
  std::vector<std::string> files_;
};

Json header(const RunConfig& cfg, const std::string& command) {
  return Json{{"version", version_string()}, {"command", command}, {"config", echo_config(cfg)}};
}

void write_json(Manifest& m, const std::string& name, const Json& j) { m.open(name) << j.dump(2) << '\n'; }

Json report_or_error(const std::function<RegimeReport()>& f) {
  try {
    return to_json(f());
  } catch (const HypothesisError& e) {
    return Json{{"error", e.what()}, {"violations", e.violations()}};
  } catch (const PreconditionError& e) {
    return Json{{"error", e.what()}};
  } catch (const DomainError& e) {
    return Json{{"error", e.what()}};
  }
}

// ---------------------------------------------------------------- regimes

struct RegimeSet {
  double D = 0.0;
  bool D_measured = false;
  Json local, global, blowup;
  std::vector<RegimeReport> reports;  // those that classified
};

RegimeSet classify_all(const RunConfig& cfg) {
  const FieldState data = build_initial_data(cfg);
  const Background bg(cfg.cosmology);
  RegimeSet s;
  const RegimeQuery q = regime_query(cfg, data);
  s.D = q.D;
  s.D_measured = !cfg.exponents.D.has_value();
  auto keep = [&s](RegimeReport r) {
    s.reports.push_back(r);
    return r;
  };
  s.local = report_or_error([&] { return keep(classify_local(q)); });
  s.global = report_or_error([&] { return keep(classify_global(q)); });
  s.blowup = report_or_error([&] {
    const auto f = initial_data_functionals(data, bg, cfg.nonlinearity, cfg.solver.pad);
    return keep(classify_blowup(cfg.cosmology, cfg.nonlinearity, f));
  });
  return s;
}

void for_each_point(const std::vector<Sweep>& sweeps,
                    const std::function<void(const std::vector<std::string>&, const std::vector<double>&)>& f) {
  std::vector<std::size_t> idx(sweeps.size(), 0);
  while (true) {
    std::vector<std::string> overrides;
    std::vector<double> values;
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
      overrides.push_back(sweeps[i].key + "=" + sweeps[i].values[idx[i]]);
      values.push_back(std::stod(sweeps[i].values[idx[i]]));
    }
    f(overrides, values);
    std::size_t i = 0;
    for (; i < sweeps.size(); ++i) {
      if (++idx[i] < sweeps[i].values.size()) break;
      idx[i] = 0;
    }
    if (i == sweeps.size()) return;
  }
}

int cmd_regimes(const RunConfig& cfg, const CommandOptions& opt, Manifest& m, std::ostream& out) {
  m.stage("classification");
  const RegimeSet s = classify_all(cfg);
  Json j = header(cfg, "regimes");
  j["D_mu0"] = s.D;
  j["D_mu0_source"] = s.D_measured ? "measured from [data]" : "[exponents] D";
  j["local"] = s.local;
  j["global"] = s.global;
  j["blowup"] = s.blowup;
  write_json(m, "regimes.json", j);
  out << j.dump(2) << '\n';

  if (opt.case_table) {
    m.stage("case table");
    std::vector<std::string> names;
    for (const auto& sw : opt.sweeps) names.push_back(sw.key);
    auto f = m.open("case_table.csv");
    write_case_table_header(f, names);
    const std::string base = echo_config(cfg);
    for_each_point(opt.sweeps, [&](const std::vector<std::string>& overrides, const std::vector<double>& values) {
      const RunConfig point = parse_config(base, overrides, false);
      for (const auto& r : classify_all(point).reports) write_case_table_rows(f, values, r);
    });
  }
  return exit_ok;
}

// ---------------------------------------------------------------- kernels

double kernel_horizon(const RunConfig& cfg, const Background& bg) {
  const double t0 = bg.life_span();
  return std::isfinite(t0) ? std::min(cfg.t_end, cfg.solver.horizon_fraction * t0) : cfg.t_end;
}

int cmd_kernels(const RunConfig& cfg, Manifest& m, std::ostream& out) {
  const Background bg(cfg.cosmology);
  const double T = kernel_horizon(cfg, bg);
  const double dt = cfg.solver.dt;
  GridSpec g = cfg.grid;
  Json j = header(cfg, "kernels");
  j["t_end"] = T;
  j["dt"] = dt;

  m.stage("envelope constants");
  std::optional<EnvelopeConstants> env;
  try {
    env = envelope_constants(T, bg, dt);
    j["envelope"] = Json{{"N1", env->n1}, {"N2", env->n2}, {"N3", env->n3}, {"N4", env->n4},
                         {"M0", env->m0},  {"M_star", env->m_star}};
  } catch (const PreconditionError& e) {
    j["envelope"] = Json{{"skipped", e.what()}};
  }

  m.stage("mode solves");
  std::vector<int> js{0};
  for (int v = 1; v < g.points / 2; v *= 2) js.push_back(v);
  if (js.back() != g.points / 2 - 1) js.push_back(g.points / 2 - 1);
  BoundReport mode_bounds;
  Json modes = Json::array();
  for (int jj : js) {
    const double k = 2.0 * M_PI * jj / g.length;
    const ModeKernel mk = solve_mode(k * k, T, bg, dt);
    const std::string name = "mode_" + std::to_string(jj) + ".csv";
    auto f = m.open(name);
    if (env) {
      write_mode_csv(f, mk, *env);
      mode_bounds.merge(verify_mode_bounds(mk, *env, bg));
    } else {
      write_mode_csv(f, mk);
    }
    modes.push_back(Json{{"lattice_index", jj}, {"k_sq", k * k}, {"file", name},
                         {"max_wronskian_dev", mk.max_wronskian_dev}});
  }
  j["modes"] = modes;
  if (env) j["mode_bounds"] = to_json(mode_bounds);

  m.stage("operator bounds");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const double cells = static_cast<double>(g.size()) * static_cast<double>(steps);
  if (!env) {
    j["operator_bounds"] = Json{{"skipped", "envelope hypotheses not met"}};
  } else if (cells > 5e8) {
    // TODO: sample a subset of classes instead of skipping large tables
    j["operator_bounds"] = Json{{"skipped", "kernel table too large (N^n * steps = " + format_double(cells) + ")"}};
  } else {
    KernelTable table(g, bg, dt);
    table.ensure(steps);
    std::vector<double> times;
    for (double fr : {0.0, 0.1, 0.37, 0.6, 1.0}) times.push_back(table.time(static_cast<std::size_t>(fr * steps)));
    j["operator_bounds"] = to_json(check_operator_bounds(table, *env, times, 3, cfg.output.seed));
    j["table_max_wronskian_dev"] = table.max_wronskian_dev();
  }
  write_json(m, "kernels.json", j);
  out << j.dump(2) << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------- simulate

LedgerMode ledger_mode(const Nonlinearity& nl) {
  const bool real_coupling = nl.lambda.imag() == 0.0;
  if (nl.lambda == Complex(0.0) || !real_coupling || nl.form != NonlinearForm::gauge_invariant)
    return LedgerMode::linear;
  return LedgerMode::nonlinear;
}

Json run_summary(const Trajectory& t) {
  Json j{{"steps", t.steps}, {"stored_states", t.states.size()}, {"final_time", t.final_time()},
         {"stop_reason", t.stop_reason}};
  if (t.blowup_time) j["blowup_time"] = *t.blowup_time;
  if (t.cap_time) j["cap_time"] = *t.cap_time;
  if (!t.picard_iterations.empty()) {
    int worst = 0;
    for (int v : t.picard_iterations) worst = std::max(worst, v);
    double ratio = 0.0;
    for (double v : t.contraction_ratios) ratio = std::max(ratio, v);
    j["slabs"] = t.picard_iterations.size();
    j["max_picard_iterations"] = worst;
    j["max_contraction_ratio"] = ratio;
  }
  return j;
}

void write_snapshots(Manifest& m, const std::string& tag, const FieldState& s) {
  auto fu = m.open(tag + "_u.snp");
  write_snapshot(fu, s.u);
  auto fv = m.open(tag + "_ut.snp");
  write_snapshot(fv, s.ut);
}

int cmd_simulate(const RunConfig& cfg, Manifest& m, std::ostream& out) {
  m.stage("initial data");
  const FieldState data = build_initial_data(cfg);
  const Background bg(cfg.cosmology);
  const Nonlinearity& nl = cfg.nonlinearity;
  const LedgerMode mode = ledger_mode(nl);
  Json j = header(cfg, "simulate");
  j["ledger_mode"] = to_string(mode);

  std::vector<Scheme> schemes;
  if (cfg.solver.scheme == Scheme::both) schemes = {Scheme::mol, Scheme::duhamel};
  else schemes = {cfg.solver.scheme};
  std::map<std::string, Trajectory> runs;
  for (Scheme s : schemes) {
    const std::string tag = to_string(s);
    m.stage(tag + " run");
    LedgerAccumulator ledger(bg, nl, cfg.grid, mode, cfg.ledger_rule, cfg.solver.pad);
    Trajectory t = s == Scheme::mol ? evolve_mol(data, cfg.t_end, bg, nl, cfg.solver, ledger.observer())
                                    : evolve_duhamel(data, cfg.t_end, bg, nl, cfg.solver, ledger.observer());
    const EnergyLedger l = ledger.finish(cfg.solver.output_stride);
    {
      auto f = m.open("trajectory_" + tag + ".csv");
      write_trajectory_csv(f, t);
    }
    {
      auto f = m.open("ledger_" + tag + ".csv");
      write_ledger_csv(f, l);
    }
    if (cfg.output.snapshots && !t.states.empty()) write_snapshots(m, "final_" + tag, t.states.back());
    Json r = run_summary(t);
    r["ledger"] = to_json(l);
    j[tag] = r;
    runs.emplace(tag, std::move(t));
  }
  if (runs.size() == 2) {
    const auto& a = runs.at("mol").states;
    const auto& b = runs.at("duhamel").states;
    double worst = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = std::max(l2_norm(a[i].u), 1e-300);
      worst = std::max(worst, l2_norm(a[i].u - b[i].u) / scale);
    }
    j["mol_vs_duhamel_max_rel_l2"] = worst;
  }
  if (cfg.output.snapshots) write_snapshots(m, "initial", data);
  write_json(m, "simulate.json", j);
  out << j.dump(2) << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------- blowup

int cmd_blowup(const RunConfig& cfg, Manifest& m, std::ostream& out, std::ostream& err) {
  m.stage("certification");
  const FieldState data = build_initial_data(cfg);
  const Background bg(cfg.cosmology);
  const Nonlinearity& nl = cfg.nonlinearity;
  const auto f = initial_data_functionals(data, bg, nl, cfg.solver.pad);
  const RegimeReport rep = classify_blowup(cfg.cosmology, nl, f);
  Json j = header(cfg, "blowup");
  j["functionals"] = to_json(f);
  j["certification"] = to_json(rep);
  if (!rep.certified) {
    write_json(m, "certification.json", j);
    out << j.dump(2) << '\n';
    err << "blowup: data not certified (" << rep.matched_case << "); no run\n";
    return exit_config_error;
  }

  m.stage("run");
  SolverConfig sc = cfg.solver;
  // Without a cap the run would keep integrating a resolved-out singularity.
  if (sc.norm_cap_factor == 0.0) sc.norm_cap_factor = 2.0 * cfg.blowup.growth_factor;
  double t_end = cfg.t_end;
  if (f.t_star) t_end = std::min(t_end, 2.0 * *f.t_star);
  BlowupAccumulator acc(bg, nl, rep, cfg.blowup);
  const Trajectory traj = evolve_mol(data, t_end, bg, nl, sc, acc.observer());
  const BlowupTrace bt = acc.finish(traj);
  {
    auto csv = m.open("blowup_trace.csv");
    write_blowup_csv(csv, bt);
  }
  j["run"] = run_summary(traj);
  j["run"]["t_end"] = t_end;
  j["run"]["norm_cap_factor"] = sc.norm_cap_factor;
  j["trace"] = to_json(bt);
  write_json(m, "certification.json", j);
  out << j.dump(2) << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------- scatter

int cmd_scatter(const RunConfig& cfg, Manifest& m, std::ostream& out) {
  m.stage("certification");
  const FieldState data = build_initial_data(cfg);
  const Background bg(cfg.cosmology);
  const RegimeQuery q = regime_query(cfg, data);
  Json j = header(cfg, "scatter");
  j["D_mu0"] = q.D;
  j["global"] = report_or_error([&] { return classify_global(q); });

  m.stage("duhamel run");
  const Trajectory traj = evolve_duhamel(data, cfg.t_end, bg, cfg.nonlinearity, cfg.solver);
  m.stage("scattering profile");
  const ScatteringProfile sp = scattering_profile(traj, bg, cfg.exponents.mu);
  {
    auto csv = m.open("scattering_residual.csv");
    write_scattering_csv(csv, sp);
  }
  j["run"] = run_summary(traj);
  j["profile"] = to_json(sp);
  write_json(m, "scatter.json", j);
  out << j.dump(2) << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  ValidationOptions vo;
  vo.seed = cfg.output.seed;
  const fs::path dir(cfg.output.directory);
  fs::create_directories(dir);
  {
    Json j = header(cfg, "validate");
    j["seed"] = vo.seed;
    j["concurrent"] = opt.concurrent;
    std::ofstream(dir / "validate.json") << j.dump(2) << '\n';
  }
  return run_validation(dir.string(), vo, opt.concurrent, out) ? exit_ok : exit_validation_failure;
}

}  // namespace

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError({"sweep '" + spec + "' is not section.key=v1,v2,..."});
  Sweep s;
  s.key = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string v;
  std::vector<std::string> problems;
  while (std::getline(ss, v, ',')) {
    std::size_t used = 0;
    try {
      (void)std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) problems.push_back("sweep " + s.key + ": value '" + v + "' is not a number");
    s.values.push_back(v);
  }
  if (s.values.empty()) problems.push_back("sweep " + s.key + " has no values");
  if (!problems.empty()) throw ConfigError(problems);
  return s;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> n{"regimes", "kernels", "simulate", "blowup", "scatter", "validate"};
  return n;
}

RegimeQuery regime_query(const RunConfig& cfg, const FieldState& data) {
  RegimeQuery q;
  q.cosmo = cfg.cosmology;
  q.nl = cfg.nonlinearity;
  q.orders = {cfg.exponents.mu0, cfg.exponents.mu};
  q.inv_q = cfg.exponents.inv_q;
  q.C = cfg.exponents.C;
  q.C0 = cfg.exponents.C0;
  q.D = cfg.exponents.D ? *cfg.exponents.D : data_size(data, Background(cfg.cosmology), cfg.exponents.mu0);
  return q;
}

int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                std::ostream& err) {
  if (name == "validate") {
    try {
      return cmd_validate(cfg, opt, out);
    } catch (const std::exception& e) {
      err << "validate: " << e.what() << '\n';
      return exit_numerical_failure;
    }
  }
  Manifest m(cfg.output.directory, name);
  auto fail = [&](int code, const std::string& what) {
    err << name << ": " << what << '\n';
    m.finish("failed at " + m.stage() + ": " + what);
    return code;
  };
  try {
    int rc = exit_ok;
    if (name == "regimes") rc = cmd_regimes(cfg, opt, m, out);
    else if (name == "kernels") rc = cmd_kernels(cfg, m, out);
    else if (name == "simulate") rc = cmd_simulate(cfg, m, out);
    else if (name == "blowup") rc = cmd_blowup(cfg, m, out, err);
    else if (name == "scatter") rc = cmd_scatter(cfg, m, out);
    else throw ConfigError({"unknown command '" + name + "'"});
    m.finish(rc == exit_ok ? "complete" : "stopped at " + m.stage() + " (exit " + std::to_string(rc) + ")");
    return rc;
  } catch (const ConfigError& e) {
    std::string all;
    for (const auto& p : e.problems()) all += (all.empty() ? "" : "; ") + p;
    return fail(exit_config_error, all);
  } catch (const HypothesisError& e) {
    std::string all;
    for (const auto& v : e.violations()) all += (all.empty() ? "" : "; ") + v;
    return fail(exit_config_error, all);
  } catch (const PreconditionError& e) {
    return fail(exit_config_error, e.what());
  } catch (const DomainError& e) {
    return fail(exit_config_error, e.what());
  } catch (const std::exception& e) {
    return fail(exit_numerical_failure, e.what());
  }
}

}  // namespace flrw::cli
