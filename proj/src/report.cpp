#include "flrw/report.hpp"

#include <cmath>
#include <ostream>

#include "flrw/errors.hpp"

namespace flrw {

namespace {

Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? num(*v) : Json(nullptr);
}

Json complex_json(std::complex<double> z) { return Json::array({num(z.real()), num(z.imag())}); }

const char* rule_name(TimeRule r) { return r == TimeRule::simpson ? "simpson" : "trapezoid"; }

}  // namespace

std::string version_string() { return "flrwkg 1.0.0"; }

Json to_json(const ExtendedReal& x) { return x.is_finite() ? Json(x.value()) : Json("inf"); }

Json to_json(const CosmologyParams& p) {
  return Json{{"n", p.n}, {"H", num(p.hubble)}, {"sigma", num(p.sigma)}, {"c", num(p.c)},
              {"m", num(p.mass)}, {"a0", num(p.a0)}};
}

Json to_json(const Nonlinearity& nl) {
  return Json{{"lambda", complex_json(nl.lambda)}, {"p", num(nl.p)}, {"form", to_string(nl.form)},
              {"kappa", num(nl.kappa)}, {"kappa_star", num(nl.kappa_star)}};
}

Json to_json(const HorizonTimes& h) {
  Json j{{"T0", to_json(h.t0)}, {"T1", to_json(h.t1)}};
  if (h.t2_defined()) {
    j["T2"] = to_json(h.t2_value());
  } else {
    const auto& u = std::get<UndefinedTime>(h.t2);
    j["T2"] = Json{{"undefined", u.reason}, {"offending", num(u.offending)}};
  }
  return j;
}

Json to_json(const ExponentSet& e) {
  return Json{{"n", e.n},
              {"mu0", num(e.mu0)},
              {"mu", num(e.mu)},
              {"p", num(e.p)},
              {"sigma", num(e.sigma)},
              {"q", to_json(e.q())},
              {"q_star", to_json(e.q_star())},
              {"theta", num(e.theta)},
              {"delta", num(e.delta)},
              {"omega", num(e.omega)},
              {"gamma", opt(e.gamma)},
              {"zeta", opt(e.zeta)},
              {"p1", to_json(e.p1)},
              {"p2", to_json(e.p2)},
              {"p_mu0", to_json(e.p_mu0)},
              {"p_star", opt(e.p_star)},
              {"p_sharp", opt(e.p_sharp)},
              {"r_star", num(1.0 / e.inv_r_star)},
              {"r_sharp", num(1.0 / e.inv_r_sharp)}};
}

Json to_json(const RegimeConstants& k) {
  return Json{{"C", num(k.C)}, {"C0", num(k.C0)}, {"D_mu0", num(k.D)}, {"G", to_json(k.G)},
              {"B0", opt(k.B0)}, {"B1", opt(k.B1)}, {"B2", opt(k.B2)}, {"B3", opt(k.B3)}};
}

Json to_json(const CaseEvaluation& c) {
  Json j{{"label", c.label}, {"hypotheses_met", c.hypotheses_met}, {"matched", c.matched}};
  j["T"] = c.matched ? to_json(c.t_bound) : Json(nullptr);
  j["detail"] = c.detail;
  return j;
}

Json to_json(const InitialFunctionals& f) {
  return Json{{"u1_sq", num(f.u1_sq)},       {"grad_u0_sq", num(f.grad_u0_sq)},
              {"u0_sq", num(f.u0_sq)},       {"u0_lp1", num(f.u0_lp1)},
              {"overlap", num(f.overlap)},   {"energy", num(f.energy)},
              {"positivity", num(f.positivity)}, {"t_star", opt(f.t_star)}};
}

Json to_json(const RegimeReport& r) {
  Json j{{"kind", r.kind}, {"matched_case", r.matched_case}, {"certified", r.certified},
         {"admissible_T", to_json(r.admissible_t)}};
  j["horizons"] = to_json(r.horizons);
  if (r.exponents) j["exponents"] = to_json(*r.exponents);
  if (r.constants) j["constants"] = to_json(*r.constants);
  Json cases = Json::array();
  for (const auto& c : r.cases) cases.push_back(to_json(c));
  j["cases"] = cases;
  j["matched_labels"] = r.matched_labels();
  if (r.master) {
    j["master"] = Json{{"T", num(r.master->t)}, {"upper", num(r.master->upper)},
                       {"saturated", r.master->saturated}, {"iterations", r.master->iterations}};
  }
  if (r.sup_a) j["sup_A"] = num(*r.sup_a);
  if (r.blowup) {
    Json checks = Json::array();
    for (const auto& c : r.blowup->checks)
      checks.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"value", num(c.value)}});
    j["blowup"] = Json{{"t_star", opt(r.blowup->t_star)}, {"direct_ok", r.blowup->direct_ok}, {"checks", checks}};
  }
  j["notes"] = r.notes;
  return j;
}

Json to_json(const BoundReport& b) {
  Json v = Json::array();
  for (const auto& x : b.violations)
    v.push_back(Json{{"t", num(x.t)}, {"k_sq", num(x.k_sq)}, {"which", x.which}, {"lhs", num(x.lhs)},
                     {"rhs", num(x.rhs)}});
  return Json{{"ok", b.ok()}, {"checked", b.checked}, {"worst_margin", num(b.worst_margin)},
              {"violations", v}, {"notes", b.notes}};
}

Json to_json(const EnergyLedger& l) {
  return Json{{"mode", to_string(l.mode)}, {"rule", rule_name(l.rule)}, {"rows", l.rows.size()},
              {"scale", num(l.scale)}, {"max_drift", num(l.max_drift)}, {"max_flux", num(l.max_flux)}};
}

Json to_json(const BlowupTrace& b) {
  return Json{{"kappa_star", num(b.kappa_star)},   {"gamma_blow", num(b.gamma_blow)},
              {"predicted_t_star", opt(b.predicted_t_star)}, {"detected_time", opt(b.detected_time)},
              {"min_gdot_ratio", num(b.min_gdot_ratio)}, {"claim_ok", b.claim_ok},
              {"envelope_ok", b.envelope_ok},       {"detected_in_time", b.detected_in_time},
              {"ok", b.ok()},                        {"samples", b.t.size()},
              {"detail", b.detail}};
}

Json to_json(const ScatteringProfile& s) {
  return Json{{"t_max", num(s.t_max)},
              {"mu", num(s.mu)},
              {"samples", s.t.size()},
              {"first_quarter_max", num(s.window_max(0.0, 0.25))},
              {"final_quarter_max", num(s.window_max(0.75, 1.0))},
              {"v0_l2", num(l2_norm(s.v0))},
              {"v1_l2", num(l2_norm(s.v1))}};
}

Json to_json(const SolverConfig& c) {
  return Json{{"dt", num(c.dt)},
              {"slab_steps", c.slab_steps},
              {"picard_tol", num(c.picard_tol)},
              {"picard_max", c.picard_max},
              {"scheme", to_string(c.scheme)},
              {"output_stride", c.output_stride},
              {"pad", c.pad},
              {"horizon_fraction", num(c.horizon_fraction)},
              {"adaptive", c.adaptive},
              {"cfl", num(c.cfl)},
              {"min_dt", num(c.min_dt)},
              {"norm_cap_factor", num(c.norm_cap_factor)}};
}

Json to_json(const GridSpec& g) {
  return Json{{"n_dim", g.n_dim}, {"points", g.points}, {"length", num(g.length)}};
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
  os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw Error("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_double(values[i]);
  os_ << '\n';
}

void write_ledger_csv(std::ostream& os, const EnergyLedger& l) {
  CsvWriter w(os, EnergyLedger::columns());
  for (const auto& r : l.rows)
    w.row({r.t, r.kinetic, r.gradient, r.mass, r.potential, r.mass_dissipation, r.grad_dissipation, r.work,
           r.potential_dissipation, r.flux, r.total});
}

void write_blowup_csv(std::ostream& os, const BlowupTrace& b) {
  CsvWriter w(os, {"t", "g", "g_dot", "G", "G_dot", "l2_norm"});
  for (std::size_t i = 0; i < b.t.size(); ++i) w.row({b.t[i], b.g[i], b.g_dot[i], b.G[i], b.G_dot[i], b.norm[i]});
}

void write_scattering_csv(std::ostream& os, const ScatteringProfile& s) {
  CsvWriter w(os, {"t", "residual"});
  for (std::size_t i = 0; i < s.t.size(); ++i) w.row({s.t[i], s.residual[i]});
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  CsvWriter w(os, {"t", "u_l2", "ut_l2", "grad_u_l2", "u_sup", "tail_fraction"});
  for (const auto& s : traj.states)
    w.row({s.t, l2_norm(s.u), l2_norm(s.ut), gradient_norm(s.u), lebesgue_norm(s.u, HUGE_VAL),
           spectral_tail_fraction(s.u)});
}

void write_mode_csv(std::ostream& os, const ModeKernel& m) {
  CsvWriter w(os, {"t", "alpha", "rho0", "drho0", "rho1", "drho1", "wronskian"});
  for (std::size_t i = 0; i < m.t.size(); ++i)
    w.row({m.t[i], m.alpha[i], m.rho0[i], m.drho0[i], m.rho1[i], m.drho1[i], m.wronskian(i)});
}

void write_mode_csv(std::ostream& os, const ModeKernel& m, const EnvelopeConstants& env) {
  CsvWriter w(os, {"t", "alpha", "rho0", "drho0", "rho1", "drho1", "wronskian", "margin_rho0", "margin_drho0",
                   "margin_rho1", "margin_drho1"});
  const double jk = japanese(m.k_sq);
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    const double eta = env.eta_at(m.t[i]);
    w.row({m.t[i], m.alpha[i], m.rho0[i], m.drho0[i], m.rho1[i], m.drho1[i], m.wronskian(i),
           std::abs(m.rho0[i]) / std::min(eta, env.n1 * jk), std::abs(m.drho0[i]) / (env.c * env.n2 * jk),
           std::abs(m.rho1[i]) * env.c / std::min(env.n3 * eta / jk, env.n4), std::abs(m.drho1[i])});
  }
}

void write_case_table_header(std::ostream& os, const std::vector<std::string>& sweep) {
  for (const auto& s : sweep) os << s << ',';
  os << "kind,label,hypotheses_met,matched,T,detail\n";
}

void write_case_table_rows(std::ostream& os, const std::vector<double>& sweep, const RegimeReport& r) {
  for (const auto& c : r.cases) {
    for (double v : sweep) os << format_double(v) << ',';
    std::string detail = c.detail;
    for (auto& ch : detail)
      if (ch == '"') ch = '\'';
    os << r.kind << ',' << c.label << ',' << (c.hypotheses_met ? 1 : 0) << ',' << (c.matched ? 1 : 0) << ','
       << (c.matched ? c.t_bound.to_string() : std::string()) << ",\"" << detail << "\"\n";
  }
}

}  // namespace flrw
