#include "flrw/cli/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <iomanip>
#include <sstream>

#include "flrw/cosmology.hpp"
#include "flrw/diagnostics.hpp"
#include "flrw/errors.hpp"
#include "flrw/kernels.hpp"
#include "flrw/solver.hpp"

namespace flrw::cli {

namespace {

using Clock = std::chrono::steady_clock;

void expect(CriterionResult& r, bool ok, const std::string& what) {
  if (!ok) r.failures.push_back(what);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CosmologyParams cosmo(int n, double H, double sigma, double c, double m, double a0 = 1.0) {
  CosmologyParams p;
  p.n = n;
  p.hubble = H;
  p.sigma = sigma;
  p.c = c;
  p.mass = m;
  p.a0 = a0;
  return p;
}

FieldState gaussian(const GridSpec& g, double amplitude, double width, double rho, const Nonlinearity& nl) {
  const double L = g.length;
  FieldState s;
  s.u = to_spectral(sample(g, [&](const std::array<double, 3>& x) {
    const double y = x[0] - L / 2;
    return Complex(amplitude * std::exp(-y * y / (width * width)), 0.0);
  }));
  s.ut = rho * s.u;
  return prepare_initial(s, nl);
}

FieldState flat(const GridSpec& g, double amplitude, double eps, double rho, const Nonlinearity& nl) {
  const double L = g.length;
  FieldState s;
  s.u = to_spectral(sample(g, [&](const std::array<double, 3>& x) {
    return Complex(amplitude * (1.0 + eps * std::cos(2.0 * M_PI * x[0] / L)), 0.0);
  }));
  s.ut = rho * s.u;
  return prepare_initial(s, nl);
}

std::string label(const CosmologyParams& p) {
  std::ostringstream os;
  os << "H=" << format_double(p.hubble) << ",sigma=" << format_double(p.sigma) << ",m=" << format_double(p.mass);
  return os.str();
}

// ---------------------------------------------------------------- 1
double linear_drift(const CosmologyParams& cp, double t_end, double dt) {
  const Background bg(cp);
  const Nonlinearity nl;
  GridSpec g;
  g.points = 256;
  const FieldState d = gaussian(g, 1.0, 0.5, 0.3, nl);
  SolverConfig cfg;
  cfg.dt = dt;
  LedgerAccumulator acc(bg, nl, g, LedgerMode::linear, TimeRule::simpson);
  evolve_mol(d, t_end, bg, nl, cfg, acc.observer());
  return acc.finish(16).max_drift;
}

void criterion_linear_energy(CriterionResult& r, const ValidationOptions&) {
  const std::vector<CosmologyParams> cases = {cosmo(1, 0.0, 0.0, 1, 1), cosmo(1, 0.5, -1.0, 1, 1),
                                              cosmo(1, 0.5, 1.0, 1, 1)};
  for (const auto& cp : cases) {
    const auto t0 = Clock::now();
    const double t1 = horizon_times(cp).t1.as_double();
    const double T = std::min(5.0, 0.9 * t1);
    const double d1 = linear_drift(cp, T, 1e-3);
    const double d2 = linear_drift(cp, T, 5e-4);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const double ratio = d1 / std::max(d2, 1e-300);
    r.metrics[label(cp)] = Json{{"T", T}, {"drift", d1}, {"drift_half_dt", d2}, {"ratio", ratio}, {"seconds", secs}};
    expect(r, d1 <= 1e-6, label(cp) + ": drift " + format_double(d1) + " > 1e-6");
    expect(r, ratio >= 4.0, label(cp) + ": dt/2 improvement " + format_double(ratio) + " < 4");
    expect(r, secs <= 30.0, label(cp) + ": case runtime " + format_double(secs) + " s > 30 s");
  }
}

// ---------------------------------------------------------------- 2
void criterion_nonlinear_energy(CriterionResult& r, const ValidationOptions&) {
  GridSpec g;
  g.points = 256;
  for (double H : {0.0, 0.5}) {
    for (double lam : {1.0, -1.0}) {
      const auto cp = cosmo(1, H, 1.0, 1, 1);
      const Background bg(cp);
      Nonlinearity nl;
      nl.lambda = lam;
      nl.p = 3;
      const FieldState d = gaussian(g, 1.0, 2.0, 0.0, nl);
      SolverConfig cfg;
      cfg.dt = 1e-3;
      LedgerAccumulator acc(bg, nl, g, LedgerMode::nonlinear, TimeRule::simpson);
      // Resolved window: stop feeding the ledger once the top octave carries energy.
      bool resolved = true;
      double last_resolved = 0.0;
      const auto obs = [&](const FieldState& s) {
        if (resolved && spectral_tail_fraction(s.u) > 1e-8) resolved = false;
        if (!resolved) return;
        acc.observe(s);
        last_resolved = s.t;
      };
      const auto traj = evolve_mol(d, 5.0, bg, nl, cfg, obs);
      const auto led = acc.finish(16);
      const std::string key = label(cp) + ",lambda=" + format_double(lam);
      r.metrics[key] = Json{{"window_end", last_resolved}, {"drift", led.max_drift}, {"stop", traj.stop_reason}};
      expect(r, led.max_drift <= 1e-5, key + ": drift " + format_double(led.max_drift) + " > 1e-5");
      expect(r, last_resolved > 1.0, key + ": resolved window shorter than t = 1");
    }
  }
}

// ---------------------------------------------------------------- 3
bool listed_operator_bound(const std::string& which) {
  for (const char* k : {"op.1 ", "op.2 ", "op.3 ", "op.4 ", "op.8 ", "op.9 "})
    if (which.rfind(k, 0) == 0) return true;
  return false;
}

void criterion_kernels(CriterionResult& r, const ValidationOptions& opt) {
  const std::vector<CosmologyParams> cases = {cosmo(1, 0.0, 0.0, 1, 1), cosmo(1, 0.5, -1.0, 1, 1),
                                              cosmo(1, 0.5, 1.0, 1, 1)};
  const double dt = 1e-3;
  for (const auto& cp : cases) {
    const Background bg(cp);
    const double T = std::min(5.0, 0.9 * bg.mass_horizon());
    const auto env = envelope_constants(T, bg, dt);
    double worst_w = 0.0;
    BoundReport modes;
    int freqs = 0;
    for (int j = 0; j < 64; ++j, ++freqs) {
      const double k = 0.25 * j;
      const auto mk = solve_mode(k * k, T, bg, dt);
      worst_w = std::max(worst_w, mk.max_wronskian_dev);
      modes.merge(verify_mode_bounds(mk, env, bg, 1e-6));
    }
    GridSpec g;
    g.points = 128;
    KernelTable table(g, bg, dt);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    table.ensure(steps);
    std::vector<double> times;
    for (double f : {0.0, 0.1, 0.37, 0.6, 1.0}) times.push_back(table.time(static_cast<std::size_t>(f * steps)));
    const auto ops = check_operator_bounds(table, env, times, 3, opt.seed, 1e-6);
    std::size_t listed = 0, other = 0;
    for (const auto& v : ops.violations) (listed_operator_bound(v.which) ? listed : other)++;
    worst_w = std::max(worst_w, table.max_wronskian_dev());
    const std::string key = label(cp);
    r.metrics[key] = Json{{"frequencies", freqs},
                          {"table_classes", table.classes()},
                          {"max_wronskian_dev", worst_w},
                          {"mode_checks", modes.checked},
                          {"mode_violations", modes.violations.size()},
                          {"operator_checks", ops.checked},
                          {"operator_violations_listed", listed},
                          {"operator_violations_other", other}};
    expect(r, freqs >= 64, key + ": fewer than 64 frequencies");
    expect(r, worst_w <= 1e-8, key + ": Wronskian deviation " + format_double(worst_w) + " > 1e-8");
    expect(r, modes.ok(), key + ": " + std::to_string(modes.violations.size()) + " per-mode bound violations");
    expect(r, listed == 0, key + ": " + std::to_string(listed) + " operator bound violations");
  }
}

// ---------------------------------------------------------------- 4
void criterion_b_closed_forms(CriterionResult& r, const ValidationOptions& opt) {
  std::mt19937_64 rng(opt.seed ^ 0x4b4b);
  double worst = 0.0;
  for (int fam = 1; fam <= 8; ++fam) {
    double fam_worst = 0.0;
    int evals = 0;
    for (int draw = 0; draw < 25; ++draw) {
      const FamilyDraw d = draw_family(fam, rng);
      const auto e = exponent_set(d.cosmo, {d.mu0, d.mu0}, d.p, d.inv_q);
      for (double T : d.times) {
        const BValue c = b_integral(T, d.cosmo, e, BMethod::closed_form);
        const BValue q = b_integral(T, d.cosmo, e, BMethod::quadrature);
        const double err = rel_err(c.value.value(), q.value.value());
        fam_worst = std::max(fam_worst, err);
        ++evals;
      }
      const auto k = regime_constants(d.cosmo, e, 1.0);
      if (fam == 2 || fam == 5 || fam == 8) {
        for (double T : {1.0, 1e2, 1e4}) {
          if (d.cosmo.life_span() <= T) continue;
          const double b = b_integral(T, d.cosmo, e, BMethod::closed_form).value.value();
          if (fam == 2) expect(r, k.B1 && b <= *k.B1 * (1 + 1e-12), "family 2: B(T) above B1");
          if (fam == 5) expect(r, k.B3 && b <= *k.B3 * (1 + 1e-12), "family 5: B(T) above B3");
          if (fam == 8) {
            const double bq = b_integral(T, d.cosmo, e, BMethod::quadrature).value.value();
            const double exact = 1.0 / (2.0 * d.cosmo.hubble);
            expect(r, rel_err(b, exact) <= 1e-14 && rel_err(bq, exact) <= 1e-8, "family 8: B(T) != 1/(2H)");
          }
        }
      }
    }
    r.metrics["family " + std::to_string(fam)] = Json{{"evaluations", evals}, {"max_rel_err", fam_worst}};
    expect(r, fam_worst <= 1e-8, "family " + std::to_string(fam) + ": closed vs quadrature " +
                                     format_double(fam_worst) + " > 1e-8");
    worst = std::max(worst, fam_worst);
  }
  r.metrics["max_rel_err"] = worst;
}

// ---------------------------------------------------------------- 5
void criterion_regime_consistency(CriterionResult& r, const ValidationOptions& opt) {
  std::mt19937_64 rng(opt.seed ^ 0x5151);
  int matched = 0, draws_with_match = 0;
  double worst_excess = -HUGE_VAL;
  for (int draw = 0; draw < 100; ++draw) {
    const RegimeQuery q = draw_admissible_query(rng);
    const RegimeReport rep = classify_local(q);
    const auto& e = *rep.exponents;
    const auto& k = *rep.constants;
    const MasterSolve& ms = *rep.master;
    bool any = false;
    for (const auto& c : rep.cases) {
      if (!c.matched) continue;
      any = true;
      ++matched;
      const std::string tag = "draw " + std::to_string(draw) + " " + c.label;
      if (c.t_bound.is_infinite()) {
        expect(r, ms.saturated, tag + ": case T = inf but bisection stops at " + format_double(ms.t));
        continue;
      }
      const double T = c.t_bound.value();
      const double t_eval = std::min(T, ms.upper);
      expect(r, master_holds(t_eval, q.cosmo, e, k, BMethod::quadrature, 1e-8),
             tag + ": master inequality fails at T = " + format_double(t_eval));
      if (!(ms.saturated && T >= ms.upper)) {
        worst_excess = std::max(worst_excess, T - ms.t);
        expect(r, T <= ms.t + 1e-6, tag + ": case T " + format_double(T) + " > bisection T " + format_double(ms.t));
      }
    }
    if (any) ++draws_with_match;
  }
  r.metrics["draws"] = 100;
  r.metrics["draws_with_match"] = draws_with_match;
  r.metrics["matched_cases"] = matched;
  r.metrics["max_case_minus_bisection"] = std::isfinite(worst_excess) ? Json(worst_excess) : Json(nullptr);
  expect(r, draws_with_match > 0, "no draw matched any local case");
}

// ---------------------------------------------------------------- 6
void criterion_solver_cross(CriterionResult& r, const ValidationOptions&) {
  GridSpec g;
  g.points = 256;
  for (const auto& cp : {cosmo(1, 0.5, 1.0, 1, 1), cosmo(1, 0.5, -1.0, 1, 1)}) {
    const Background bg(cp);
    const Nonlinearity lin;
    const FieldState d = gaussian(g, 1.0, 0.5, 0.3, lin);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    const auto mol = evolve_mol(d, 2.0, bg, lin, cfg);
    const auto duh = evolve_duhamel(d, 2.0, bg, lin, cfg);
    const auto fre = evolve_free(d, 2.0, bg, cfg);
    double md = 0.0, mf = 0.0, df = 0.0;
    const bool aligned = mol.states.size() == duh.states.size() && mol.states.size() == fre.states.size();
    expect(r, aligned, label(cp) + ": output grids differ");
    if (aligned) {
      for (std::size_t i = 0; i < mol.states.size(); ++i) {
        md = std::max(md, l2_norm(mol.states[i].u - duh.states[i].u));
        mf = std::max(mf, l2_norm(mol.states[i].u - fre.states[i].u));
        df = std::max(df, l2_norm(duh.states[i].u - fre.states[i].u));
      }
    }
    r.metrics["linear " + label(cp)] = Json{{"mol_duhamel", md}, {"mol_free", mf}, {"duhamel_free", df}};
    expect(r, std::max({md, mf, df}) <= 1e-7, label(cp) + ": linear representations differ by " +
                                                format_double(std::max({md, mf, df})));
  }
  {
    const auto cp = cosmo(1, 0.5, 1.0, 1, 1);
    const Background bg(cp);
    Nonlinearity nl;
    nl.lambda = 1.0;
    nl.p = 3;
    const FieldState d = gaussian(g, 1e-3, 1.0, 0.3, nl);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    const auto mol = evolve_mol(d, 1.0, bg, nl, cfg);
    const auto duh = evolve_duhamel(d, 1.0, bg, nl, cfg);
    const double diff = l2_norm(mol.states.back().u - duh.states.back().u);
    const double worst_ratio =
        duh.contraction_ratios.empty() ? 0.0 : *std::max_element(duh.contraction_ratios.begin(), duh.contraction_ratios.end());
    r.metrics["cubic small data"] = Json{{"l2_diff_t1", diff},
                                         {"relative", diff / l2_norm(mol.states.back().u)},
                                         {"worst_contraction", worst_ratio}};
    expect(r, std::abs(mol.states.back().t - 1.0) < 1e-12 && std::abs(duh.states.back().t - 1.0) < 1e-12,
           "cubic run did not reach t = 1");
    expect(r, diff <= 1e-6, "cubic Duhamel vs MoL differ by " + format_double(diff));
  }
  {
    const auto cp = cosmo(1, 0.5, 1.0, 1, 1);
    const Background bg(cp);
    Nonlinearity nl;
    nl.lambda = 1.0;
    nl.p = 3;
    const FieldState d = gaussian(g, 1.0, 0.5, 0.3, nl);
    auto run = [&](double dt) {
      SolverConfig cfg;
      cfg.dt = dt;
      cfg.output_stride = 1 << 20;
      return evolve_mol(d, 1.0, bg, nl, cfg).states.back();
    };
    const double base = 0.02;
    const auto ref = run(base / 8);
    std::vector<double> err;
    for (int i = 0; i < 3; ++i) err.push_back(l2_norm(run(base / (1 << i)).u - ref.u));
    const double r1 = err[0] / err[1], r2 = err[1] / err[2];
    r.metrics["mol convergence"] = Json{{"errors", err}, {"ratios", {r1, r2}}};
    for (double x : {r1, r2})
      expect(r, x >= 12.0 && x <= 20.0, "MoL error ratio " + format_double(x) + " outside [12, 20]");
  }
}

// ---------------------------------------------------------------- 7
void criterion_blowup(CriterionResult& r, const ValidationOptions&) {
  struct Case {
    std::string name;
    CosmologyParams cp;
    double p, kappa_star, amplitude;
  };
  const std::vector<Case> cases = {{"H=0,p=3", cosmo(1, 0.0, 0.0, 1, 1), 3.0, 0.45, 3.0},
                                   {"H=-0.1,sigma=0,p=5", cosmo(1, -0.1, 0.0, 1, 1), 5.0, 0.9, 2.0}};
  GridSpec g;
  g.points = 512;
  for (const auto& c : cases) {
    const Background bg(c.cp);
    Nonlinearity nl;
    nl.lambda = -1.0;
    nl.p = c.p;
    nl.kappa = c.p + 1.0;
    nl.kappa_star = c.kappa_star;
    const FieldState d = flat(g, c.amplitude, 1e-6, 1.0, nl);
    const auto f = initial_data_functionals(d, bg, nl);
    const auto rep = classify_blowup(c.cp, nl, f);
    Json m{{"case", rep.matched_case}, {"certified", rep.certified}, {"t_star", f.t_star ? Json(*f.t_star) : Json()}};
    expect(r, rep.certified, c.name + ": data not certified (" + rep.matched_case + ")");
    if (!rep.certified) {
      r.metrics[c.name] = m;
      continue;
    }
    SolverConfig cfg;
    cfg.adaptive = true;
    cfg.dt = 1e-3;
    cfg.min_dt = 1e-12;
    cfg.norm_cap_factor = 2e3;
    cfg.output_stride = 50;
    BlowupAccumulator acc(bg, nl, rep);
    const auto traj = evolve_mol(d, 2.0 * *f.t_star, bg, nl, cfg, acc.observer());
    const auto bt = acc.finish(traj);
    m["detected_time"] = bt.detected_time ? Json(*bt.detected_time) : Json();
    m["claim_ok"] = bt.claim_ok;
    m["min_gdot_ratio"] = bt.min_gdot_ratio;
    m["envelope_ok"] = bt.envelope_ok;
    m["detected_in_time"] = bt.detected_in_time;
    m["stop"] = traj.stop_reason;
    m["samples"] = bt.t.size();
    r.metrics[c.name] = m;
    expect(r, bt.detected_in_time, c.name + ": no crossing of 1e3 ||u0|| by 1.1 T* (" + bt.detail + ")");
    expect(r, bt.claim_ok, c.name + ": gdot >= 0 fails");
    expect(r, bt.envelope_ok, c.name + ": G envelope fails");
  }
}

// ---------------------------------------------------------------- 8
void criterion_scattering(CriterionResult& r, const ValidationOptions&) {
  const auto cp = cosmo(1, 0.5, -1.0, 1, 1);
  const Background bg(cp);
  Nonlinearity nl;
  nl.lambda = 1.0;
  nl.p = 5.0;
  GridSpec g;
  g.points = 256;
  std::vector<double> finals;
  for (double A : {0.2, 0.1}) {
    const FieldState d = gaussian(g, A, 2.0, 0.0, nl);
    RegimeQuery q;
    q.cosmo = cp;
    q.nl = nl;
    q.D = data_size(d, bg, 0.0);
    const auto rep = classify_global(q);
    const bool iv = std::find(rep.matched_labels().begin(), rep.matched_labels().end(), "small_global.iv") !=
                    rep.matched_labels().end();
    SolverConfig cfg;
    cfg.dt = 5e-3;
    cfg.output_stride = 10;
    const auto traj = evolve_duhamel(d, 10.0, bg, nl, cfg);
    const auto sp = scattering_profile(traj, bg, 0.0);
    const double first = sp.window_max(0.0, 0.25), last = sp.window_max(0.75, 1.0);
    finals.push_back(last);
    const std::string key = "amplitude " + format_double(A);
    r.metrics[key] = Json{{"D_mu0", q.D}, {"certified", rep.certified}, {"small_global_iv", iv},
                          {"first_quarter", first}, {"final_quarter", last}, {"t_max", sp.t_max}};
    expect(r, rep.certified && iv, key + ": not certified as small_global.iv");
    expect(r, last < first, key + ": final-quarter residual not below first quarter");
  }
  const double ratio = finals[0] / std::max(finals[1], 1e-300);
  r.metrics["halving_ratio"] = ratio;
  expect(r, ratio >= std::pow(2.0, nl.p) * 0.5, "residual ratio " + format_double(ratio) + " < 2^p * 0.5");
}

// ---------------------------------------------------------------- 9
double richardson(const std::function<double(double)>& f, double t, double h) {
  const auto d = [&](double s) { return (f(t + s) - f(t - s)) / (2 * s); };
  return (4 * d(h / 2) - d(h)) / 3;
}

void criterion_cosmology(CriterionResult& r, const ValidationOptions& opt) {
  std::mt19937_64 rng(opt.seed ^ 0x9999);
  std::uniform_real_distribution<double> uH(-1.0, 1.0), us(-2.5, 2.0), ua(0.5, 2.0), uc(0.5, 2.0), um(0.0, 2.0),
      u01(0.0, 1.0);
  double w_id = 0.0, w_fd = 0.0;
  int fd_checks = 0;
  for (int it = 0; it < 400; ++it) {
    const int n = 1 + it % 4;
    auto p = cosmo(n, uH(rng), us(rng), uc(rng), um(rng), ua(rng));
    if (it % 9 == 0) p.sigma = -1.0;
    if (it % 13 == 0) p.hubble = 0.0;
    const double te = std::min(p.life_span(), 3.0);
    const double t = 0.8 * te * u01(rng);
    const auto d = scale_derivatives(t, p);
    const double e = n * (1 + p.sigma);
    const double ra = d.a / p.a0;
    const double k = p.nh_over_2c();
    // Identities written out independently of the library.
    const double rate = p.hubble * std::pow(ra, -e / 2);
    const double acc = p.hubble * p.hubble * std::pow(ra, -e) * (1 - e / 2);
    const double rdot = -e * p.hubble * p.hubble / 2 * std::pow(ra, -e);
    const double b = p.sigma == -1.0 ? 1.0 : 1 + e * p.hubble * t / 2;
    const double m2 = p.mass * p.mass + p.sigma * k * k / (b * b);
    const double mmd = -p.c * p.sigma * (1 + p.sigma) * k * k * k / (b * b * b);
    const double c2 = p.c * p.c;
    const double m2_def = p.mass * p.mass - n * (n - 2.0) / (4 * c2) * d.rate * d.rate - n / (2 * c2) * d.a_ddot / d.a;
    auto idr = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
    w_id = std::max({w_id, idr(d.rate, rate), idr(d.a_ddot / d.a, acc), idr(d.rate_dot, rdot),
                     idr(curved_mass_sq(t, p), m2), idr(m2_def, m2), idr(mass_mass_dot(t, p), mmd)});
    const double h = 1e-3 * std::max(1e-2, std::min(t, te - t));
    if (t > 2 * h && t + 2 * h < te) {
      const auto a = [&](double s) { return scale_factor(s, p); };
      const auto ad = [&](double s) { return scale_derivatives(s, p).a_dot; };
      const auto msq = [&](double s) { return curved_mass_sq(s, p); };
      // Relative error, floored at 1e-8 |f| / h: with the 1e-6 tolerance that leaves
      // an absolute budget of ~50 ulps of |f| / h, the Richardson quotient's own roundoff.
      auto fr = [h](double x, double y, double f) {
        return std::abs(x - y) / std::max({std::abs(y), 1e-8 * std::abs(f) / h, 1e-300});
      };
      w_fd = std::max({w_fd, fr(richardson(a, t, h), d.a_dot, d.a), fr(richardson(ad, t, h), d.a_ddot, d.a_dot)});
      if (std::abs(m2) > 1e-6) w_fd = std::max(w_fd, fr(richardson(msq, t, h), 2 * mass_mass_dot(t, p), m2));
      ++fd_checks;
    }
  }
  // T1 as the zero of M^2 when (1+sigma)H < 0, sigma < 0, m > sqrt|sigma| n|H|/2c.
  double w_t1 = 0.0;
  int t1_checks = 0;
  for (int it = 0; it < 100; ++it) {
    const int n = 1 + it % 3;
    const double sigma = -0.9 * u01(rng) - 0.05;
    const double H = -(0.1 + u01(rng));
    const double c = uc(rng);
    const double thr = std::sqrt(std::abs(sigma)) * n * std::abs(H) / (2 * c);
    if (thr <= 0) continue;
    const auto p = cosmo(n, H, sigma, c, thr * (1.05 + u01(rng)), 1.0);
    const auto hz = horizon_times(p);
    if (hz.t1.is_infinite()) {
      r.failures.push_back("T1 infinite in the sign-change case");
      continue;
    }
    w_t1 = std::max(w_t1, std::abs(curved_mass_sq(hz.t1.value(), p)) / std::max(1.0, p.mass * p.mass));
    ++t1_checks;
  }
  r.metrics["identity_max_err"] = w_id;
  r.metrics["finite_difference_max_err"] = w_fd;
  r.metrics["finite_difference_checks"] = fd_checks;
  r.metrics["t1_zero_max"] = w_t1;
  r.metrics["t1_checks"] = t1_checks;
  expect(r, w_id <= 1e-10, "closed-form identities off by " + format_double(w_id));
  expect(r, w_fd <= 1e-6, "finite-difference oracle off by " + format_double(w_fd));
  expect(r, w_t1 <= 1e-10, "M^2(T1) = " + format_double(w_t1));
  expect(r, fd_checks > 100 && t1_checks > 50, "too few sampled points");
}

double mu0_cap(int n) { return n <= 2 ? n / 2.0 : n / 2.0 - 1.0; }

double inv_q_cap(int n, double mu0, double p) {
  const double nm = n - 2 * mu0;
  return (p - 1) * nm > 0 ? std::min(0.5, 2 / ((p - 1) * nm)) : 0.5;
}

}  // namespace

FamilyDraw draw_family(int family, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  for (int attempt = 0; attempt < 10000; ++attempt) {
    FamilyDraw d;
    const int n = 1 + static_cast<int>(u(rng) * 3);
    d.cosmo = cosmo(n, in(0.1, 1.5), 0.0, in(0.5, 2.0), in(0.5, 2.0), in(0.5, 2.0));
    const double mc = mu0_cap(n);
    bool finite_q = true;
    switch (family) {
      case 1:
        d.cosmo.hubble = 0.0;
        d.cosmo.sigma = in(-2.0, 2.0);
        d.mu0 = in(0.0, 0.9) * mc;
        d.p = in(1.2, 5.0);
        d.inv_q = 0.0;
        break;
      case 2:
      case 4: {
        d.cosmo.sigma = in(0.0, 1.5);
        d.mu0 = in(0.3, 0.95) * mc;
        const double p1 = 1 + n * (1 + d.cosmo.sigma) / (2 * d.mu0);
        d.p = family == 4 ? p1 : p1 + in(0.2, 3.0);
        break;
      }
      case 3: {
        const double pick = u(rng);
        if (pick < 0.34) {
          d.cosmo.sigma = in(-3.0, -1.2);
          d.mu0 = in(0.0, 0.9) * mc;
        } else if (pick < 0.67) {
          d.cosmo.sigma = in(0.0, 1.5);
          d.mu0 = 0.0;
        } else {
          d.cosmo.sigma = in(0.0, 1.5);
          d.mu0 = in(0.1, 0.9) * mc;
        }
        const double p1 = d.mu0 > 0 ? 1 + n * (1 + d.cosmo.sigma) / (2 * d.mu0) : 8.0;
        d.p = in(1.1, std::min(p1, 8.0) - 0.05);
        break;
      }
      case 5:
        d.cosmo.sigma = -1.0;
        d.mu0 = in(0.1, 0.9) * mc;
        d.p = in(1.2, 5.0);
        break;
      case 6:
        d.cosmo.sigma = -1.0;
        d.mu0 = 0.0;
        d.p = in(1.2, 5.0);
        break;
      case 7:
      case 8: {
        finite_q = false;
        d.cosmo.sigma = family == 7 ? in(0.0, 1.5) : (u(rng) < 0.5 ? in(0.0, 1.5) : (u(rng) < 0.5 ? -1.0 : in(-3.0, -1.1)));
        if (family == 7) {
          d.mu0 = u(rng) < 0.5 ? 0.0 : in(0.05, 0.5) * mc;
        } else {
          d.mu0 = d.cosmo.sigma >= 0 ? in(0.3, 0.95) * mc : in(0.0, 0.9) * mc;
        }
        const double p2 = 1 + 4 / (n - 2 * d.mu0);
        const double p1 = d.mu0 > 0 ? 1 + n * (1 + d.cosmo.sigma) / (2 * d.mu0) : HUGE_VAL;
        if (family == 7 && d.mu0 > 0)
          d.p = in(p2, std::max(p2, p1 - 0.05));
        else if (family == 8 && d.cosmo.sigma >= 0)
          d.p = std::max(p1, p2) + in(0.0, 2.0);
        else
          d.p = p2 + in(0.0, 3.0);
        break;
      }
      default:
        throw DomainError("family must be 1..8");
    }
    if (finite_q && family != 1) d.inv_q = in(0.05, 0.95) * inv_q_cap(n, d.mu0, d.p);
    try {
      const auto e = exponent_set(d.cosmo, {d.mu0, d.mu0}, d.p, d.inv_q);
      if (closed_form_family(d.cosmo, e) != family) continue;
      const double te = std::min(0.9 * d.cosmo.life_span(), 20.0);
      d.times = {in(0.02, 0.3) * te, in(0.3, 0.7) * te, in(0.7, 1.0) * te};
      return d;
    } catch (const Error&) {
      continue;
    }
  }
  throw NumericalError("no admissible draw for family " + std::to_string(family));
}

RegimeQuery draw_admissible_query(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  for (int attempt = 0; attempt < 10000; ++attempt) {
    RegimeQuery q;
    const int n = 1 + static_cast<int>(u(rng) * 3);
    const double H = u(rng) < 0.2 ? 0.0 : in(0.05, 1.5);
    double sigma;
    const double pick = u(rng);
    if (pick < 0.25) sigma = -1.0;
    else if (pick < 0.75) sigma = in(0.0, 2.0);
    else sigma = in(-3.0, -1.1);
    q.cosmo = cosmo(n, H, sigma, in(0.5, 2.0), in(0.3, 2.0), in(0.5, 2.0));
    q.nl.lambda = u(rng) < 0.5 ? 1.0 : -1.0;
    const double mc = mu0_cap(n);
    const double mu0 = u(rng) < 0.4 ? 0.0 : in(0.0, 0.9) * mc;
    q.nl.p = in(1.0, 7.0);
    q.orders = {mu0, mu0};
    if (H == 0.0 ? u(rng) < 0.7 : u(rng) < 0.5)
      q.inv_q = H == 0.0 ? std::optional<double>(0.0) : std::nullopt;
    else
      q.inv_q = in(0.0, 1.0) * inv_q_cap(n, mu0, q.nl.p);
    q.D = std::pow(10.0, in(-3.0, 0.5));
    try {
      classify_local(q);
      return q;
    } catch (const Error&) {
      continue;
    }
  }
  throw NumericalError("no admissible regime query found");
}

std::string CriterionResult::summary_line() const {
  std::ostringstream os;
  os << (passed ? "PASS" : "FAIL") << "  [" << id << "] " << name << "  (" << std::fixed << std::setprecision(2) << seconds
     << std::defaultfloat << " s / " << format_double(budget) << " s)";
  if (!failures.empty()) os << "  " << failures.front() << (failures.size() > 1 ? " (+more)" : "");
  return os.str();
}

const std::vector<CriterionSpec>& acceptance_criteria() {
  static const std::vector<CriterionSpec> c = {
      {1, "linear energy identity", 90.0, criterion_linear_energy},
      {2, "nonlinear energy identity", 60.0, criterion_nonlinear_energy},
      {3, "kernel suite", 60.0, criterion_kernels},
      {4, "B(T) closed forms", 20.0, criterion_b_closed_forms},
      {5, "regime consistency", 30.0, criterion_regime_consistency},
      {6, "solver cross-validation", 120.0, criterion_solver_cross},
      {7, "blow-up witness", 120.0, criterion_blowup},
      {8, "scattering trend", 120.0, criterion_scattering},
      {9, "cosmology closed forms", 5.0, criterion_cosmology},
  };
  return c;
}

CriterionResult run_criterion(const CriterionSpec& spec, const ValidationOptions& opt) {
  CriterionResult r;
  r.id = spec.id;
  r.name = spec.name;
  r.budget = spec.budget;
  const auto t0 = Clock::now();
  try {
    spec.body(r, opt);
  } catch (const std::exception& e) {
    r.failures.push_back(std::string("exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (r.seconds > r.budget)
    r.failures.push_back("runtime " + format_double(r.seconds) + " s over budget " + format_double(r.budget) + " s");
  r.passed = r.failures.empty();
  return r;
}

bool run_validation(const std::string& dir, const ValidationOptions& opt, bool concurrent, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto& specs = acceptance_criteria();
  std::vector<CriterionResult> results(specs.size());
  auto write_one = [&](const CriterionResult& r) {
    Json j{{"id", r.id},         {"name", r.name},     {"passed", r.passed},     {"seconds", r.seconds},
           {"budget", r.budget}, {"failures", r.failures}, {"metrics", r.metrics}, {"version", version_string()},
           {"seed", opt.seed}};
    std::ofstream(fs::path(dir) / ("criterion_" + std::to_string(r.id) + ".json")) << j.dump(2) << '\n';
  };
  if (concurrent) {
    std::vector<std::future<CriterionResult>> futs;
    for (const auto& s : specs) futs.push_back(std::async(std::launch::async, [&s, &opt] { return run_criterion(s, opt); }));
    for (std::size_t i = 0; i < futs.size(); ++i) {
      results[i] = futs[i].get();
      write_one(results[i]);
    }
  } else {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      results[i] = run_criterion(specs[i], opt);
      write_one(results[i]);
      log << results[i].summary_line() << '\n' << std::flush;
    }
  }
  bool all = true;
  std::ofstream manifest(fs::path(dir) / "MANIFEST");
  manifest << version_string() << '\n' << "seed " << opt.seed << '\n';
  for (const auto& r : results) {
    all = all && r.passed;
    manifest << "criterion_" << r.id << ".json " << (r.passed ? "pass" : "FAIL") << '\n';
    if (concurrent) log << r.summary_line() << '\n';
  }
  manifest << (all ? "status complete, all passed" : "status complete, failures present") << '\n';
  return all;
}

}  // namespace flrw::cli
