#include "flrw/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw {

std::string to_string(LedgerMode m) { return m == LedgerMode::linear ? "linear" : "nonlinear"; }

std::vector<std::string> EnergyLedger::columns() {
  return {"t",    "kinetic", "gradient", "mass", "potential", "mass_dissipation", "grad_dissipation",
          "work", "potential_dissipation", "flux", "total"};
}

namespace {

double sq(double x) { return x * x; }

// int d_j e^j dx with e^j = -2 a^-2 Re(conj(u_t) d_j u), collocated.
double flux_integral(const FieldState& s, double a) {
  const GridSpec& g = s.u.grid;
  const PhysicalField ut = to_physical(s.ut);
  double total = 0.0;
  for (int axis = 0; axis < g.n_dim; ++axis) {
    SpectralField du(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double k = 2.0 * 3.14159265358979323846 * g.signed_index(g.lattice(i)[axis]) / g.length;
      du.coef[i] = Complex(0.0, k) * s.u.coef[i];
    }
    const PhysicalField dx = to_physical(du);
    PhysicalField e(g);
    for (std::size_t i = 0; i < g.size(); ++i) e.values[i] = -2.0 / (a * a) * (std::conj(ut.values[i]) * dx.values[i]).real();
    SpectralField ec = to_spectral(e);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double k = 2.0 * 3.14159265358979323846 * g.signed_index(g.lattice(i)[axis]) / g.length;
      ec.coef[i] *= Complex(0.0, k);
    }
    const PhysicalField div = to_physical(ec);
    double sum = 0.0;
    for (const auto& v : div.values) sum += v.real();
    total += sum * g.cell_volume();
  }
  return total;
}

void require_real_gauge_invariant(const Nonlinearity& nl, const char* what) {
  if (!nl.real_lambda() || nl.form != NonlinearForm::gauge_invariant) {
    throw PreconditionError(std::string(what) + " needs f(u) = lambda |u|^{p-1} u with real lambda");
  }
}

}  // namespace

LedgerAccumulator::LedgerAccumulator(const Background& bg, const Nonlinearity& nl, const GridSpec& grid,
                                     LedgerMode mode, TimeRule rule, int pad)
    : bg_(bg), nl_(nl), h_(grid, nl, pad), mode_(mode), rule_(rule), k2_(grid.k_sq_table()) {
  if (mode == LedgerMode::nonlinear && !nl.real_lambda()) {
    throw PreconditionError("nonlinear ledger needs a real coupling lambda");
  }
}

void LedgerAccumulator::observe(const FieldState& s) {
  if (mode_ == LedgerMode::nonlinear && nl_.form == NonlinearForm::gauge_variant && t_.empty() &&
      !(to_physical(s.u).is_real(1e-12) && to_physical(s.ut).is_real(1e-12))) {
    throw PreconditionError("nonlinear ledger with a gauge-variant f needs real data");
  }
  if (!t_.empty() && !(s.t > t_.back())) throw PreconditionError("ledger states must have increasing times");
  const auto d = bg_.scale(s.t);
  const double c = bg_.c();
  const double m2 = bg_.mass_sq(s.t);
  const double ut2 = sq(l2_norm(s.ut));
  const double g2 = sq(gradient_norm(s.u));
  const double u2 = sq(l2_norm(s.u));

  LedgerRow r;
  r.t = s.t;
  r.kinetic = ut2 / (c * c);
  r.gradient = g2 / (d.a * d.a);
  r.mass = m2 * u2;
  r.flux = flux_integral(s, d.a);
  f_mass_.push_back(-2.0 * bg_.mass_mass_dot(s.t) * u2);
  f_grad_.push_back(2.0 * d.a_dot / (d.a * d.a * d.a) * g2);
  if (nl_.is_linear()) {
    f_work_.push_back(0.0);
    f_pot_.push_back(0.0);
  } else if (mode_ == LedgerMode::linear) {
    const SpectralField h = h_(s.u, d.a);
    f_work_.push_back(2.0 * inner_real(h, s.ut));
    f_pot_.push_back(0.0);
  } else {
    r.potential = h_.potential_integral(s.u, d.a);
    f_work_.push_back(0.0);
    f_pot_.push_back(nl_.scaling_exponent(bg_.n()) * d.rate * r.potential);
  }
  t_.push_back(s.t);
  inst_.push_back(r);
}

EnergyLedger LedgerAccumulator::finish(int stride) const {
  if (t_.empty()) throw PreconditionError("ledger has no samples");
  if (stride < 1) throw PreconditionError("ledger stride must be >= 1");
  const auto im = cumulative_integral(t_, f_mass_, rule_);
  const auto ig = cumulative_integral(t_, f_grad_, rule_);
  const auto iw = cumulative_integral(t_, f_work_, rule_);
  const auto ip = cumulative_integral(t_, f_pot_, rule_);

  EnergyLedger L;
  L.mode = mode_;
  L.rule = rule_;
  const LedgerRow& r0 = inst_.front();
  L.scale = std::abs(r0.kinetic) + std::abs(r0.gradient) + std::abs(r0.mass) + std::abs(r0.potential);
  double total0 = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    LedgerRow r = inst_[i];
    r.mass_dissipation = im[i];
    r.grad_dissipation = ig[i];
    r.work = iw[i];
    r.potential_dissipation = ip[i];
    r.total = r.kinetic + r.gradient + r.mass + r.potential + r.mass_dissipation + r.grad_dissipation + r.work +
              r.potential_dissipation;
    if (i == 0) total0 = r.total;
    const double drift = std::abs(r.total - total0) / (L.scale > 0.0 ? L.scale : 1.0);
    L.max_drift = std::max(L.max_drift, drift);
    L.max_flux = std::max(L.max_flux, std::abs(r.flux));
    if (i % static_cast<std::size_t>(stride) == 0 || i + 1 == t_.size()) L.rows.push_back(r);
  }
  return L;
}

EnergyLedger energy_ledger(const Trajectory& traj, const Background& bg, const Nonlinearity& nl, LedgerMode mode,
                           TimeRule rule, int pad) {
  if (traj.states.empty()) throw PreconditionError("ledger needs a trajectory with stored states");
  LedgerAccumulator acc(bg, nl, traj.states.front().u.grid, mode, rule, pad);
  for (const auto& s : traj.states) acc.observe(s);
  return acc.finish();
}

double XnormComponents::norm() const { return std::max({ut_sup, grad_sup, mass_sup, grad_l2, mass_l2}); }

XnormReport xnorm_report(const Trajectory& traj, const Background& bg, const Nonlinearity& nl,
                         const std::vector<double>& nu_list, int pad) {
  if (traj.states.empty()) throw PreconditionError("X-norm needs stored states");
  const double c = bg.c();
  for (const auto& s : traj.states) {
    const auto d = bg.scale(s.t);
    if (d.a_dot < -1e-14 * d.a) throw PreconditionError("X-norm needs adot >= 0; adot < 0 at t = " + format_double(s.t));
    if (bg.mass_sq(s.t) < 0.0) throw PreconditionError("X-norm needs M^2 >= 0; M^2 < 0 at t = " + format_double(s.t));
    if (bg.mass_mass_dot(s.t) > 1e-14) {
      throw PreconditionError("X-norm needs Mdot <= 0; Mdot > 0 at t = " + format_double(s.t));
    }
  }
  XnormReport rep;
  std::vector<double> t;
  for (const auto& s : traj.states) t.push_back(s.t);
  auto integrate = [&](const std::vector<double>& f) {
    return t.size() < 2 ? 0.0 : cumulative_integral(t, f, TimeRule::trapezoid).back();
  };

  for (double nu : nu_list) {
    XnormComponents x;
    x.nu = nu;
    std::vector<double> fg, fm;
    for (const auto& s : traj.states) {
      const auto d = bg.scale(s.t);
      const double m2 = bg.mass_sq(s.t);
      const double un = sobolev_norm(s.u, nu, true);
      const double gn = sobolev_norm(s.u, nu + 1.0, true);
      x.ut_sup = std::max(x.ut_sup, sobolev_norm(s.ut, nu, true) / c);
      x.grad_sup = std::max(x.grad_sup, gn / d.a);
      x.mass_sup = std::max(x.mass_sup, std::sqrt(m2) * un);
      fg.push_back(d.a_dot / (d.a * d.a * d.a) * gn * gn);
      fm.push_back(-bg.mass_mass_dot(s.t) * un * un);
    }
    x.grad_l2 = std::sqrt(std::max(0.0, integrate(fg)));
    x.mass_l2 = std::sqrt(std::max(0.0, integrate(fm)));
    rep.components.push_back(x);
  }

  const FieldState& s0 = traj.states.front();
  rep.data_size = l2_norm(s0.ut) / c + gradient_norm(s0.u) / bg.a0() + std::sqrt(std::max(0.0, bg.mass_sq(0.0))) * l2_norm(s0.u);
  const NonlinearTerm h(s0.u.grid, nl, pad);
  std::vector<double> fh;
  for (const auto& s : traj.states) fh.push_back(l2_norm(h(s.u, bg.a(s.t))));
  rep.forcing_l1l2 = integrate(fh);
  return rep;
}

VirialReport virial_check(const Trajectory& traj, const Background& bg, const Nonlinearity& nl, int pad) {
  require_real_gauge_invariant(nl, "virial identity");
  const auto& st = traj.states;
  if (st.size() < 3) throw PreconditionError("virial check needs at least 3 stored states");
  const double dt = st[1].t - st[0].t;
  std::size_t n = 2;
  while (n < st.size() && std::abs((st[n].t - st[n - 1].t) - dt) <= 1e-9 * dt) ++n;
  if (n < 3) throw PreconditionError("virial check needs 3 uniformly spaced states");

  const double c2 = bg.c() * bg.c();
  const NonlinearTerm h(st.front().u.grid, nl, pad);
  std::vector<double> norm2(n), rhs(n), mag(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = st[i];
    const double a = bg.a(s.t);
    const double m2 = bg.mass_sq(s.t);
    const double ut2 = sq(l2_norm(s.ut));
    const double g2 = sq(gradient_norm(s.u));
    const double u2 = sq(l2_norm(s.u));
    const double w = h.work_density(s.u, a);
    norm2[i] = u2;
    rhs[i] = 2.0 * ut2 - 2.0 * c2 * g2 / (a * a) - 2.0 * c2 * m2 * u2 - 2.0 * c2 * w;
    scale = std::max(scale, 2.0 * ut2 + 2.0 * c2 * g2 / (a * a) + 2.0 * c2 * std::abs(m2) * u2 + 2.0 * c2 * std::abs(w));
  }
  VirialReport rep;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d2 = (norm2[i + 1] - 2.0 * norm2[i] + norm2[i - 1]) / (dt * dt);
    const double r = scale > 0.0 ? std::abs(d2 - rhs[i]) / scale : std::abs(d2 - rhs[i]);
    rep.t.push_back(st[i].t);
    rep.residual.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  return rep;
}

double data_size(const FieldState& data, const Background& bg, double mu0) {
  const double c = bg.c();
  const double m2 = bg.mass_sq(0.0);
  if (m2 < 0.0) throw PreconditionError("data_size: M(0)^2 < 0");
  return sobolev_norm(data.ut, mu0, true) / c + 1.0 / bg.a0() * sobolev_norm(data.u, mu0 + 1.0, true) +
         std::sqrt(m2) * sobolev_norm(data.u, mu0, true);
}

InitialFunctionals initial_data_functionals(const FieldState& data, const Background& bg, const Nonlinearity& nl,
                                            int pad) {
  const double u1_sq = sq(l2_norm(data.ut));
  const double g_sq = sq(gradient_norm(data.u));
  const double u0_sq = sq(l2_norm(data.u));
  const double lp1 = std::pow(lebesgue_norm(data.u, nl.p + 1.0, pad), nl.p + 1.0);
  const double overlap = inner_real(data.u, data.ut);
  return make_functionals(u1_sq, g_sq, u0_sq, lp1, overlap, bg.params(), nl);
}

BlowupAccumulator::BlowupAccumulator(const Background& bg, const Nonlinearity& nl, const RegimeReport& certification,
                                     BlowupSettings settings)
    : bg_(bg), nl_(nl), settings_(settings) {
  if (certification.kind != "blowup" || !certification.blowup) {
    throw PreconditionError("blow-up monitor needs the blow-up hypothesis check to run first");
  }
  if (!certification.certified) {
    throw PreconditionError("blow-up monitor refused: the data are not certified (matched case " +
                            certification.matched_case + ")");
  }
  if (bg.params().hubble > 0.0) throw PreconditionError("blow-up monitor needs adot <= 0");
  t_star_ = certification.blowup->t_star;
  trace_.kappa_star = nl.kappa_star;
  trace_.predicted_t_star = t_star_;
}

void BlowupAccumulator::observe(const FieldState& s) {
  const auto d = bg_.scale(s.t);
  const double nu = l2_norm(s.u);
  const double g = d.a * d.a * nu * nu;
  const double gd = 2.0 * d.a * d.a * inner_real(s.ut, s.u) + 2.0 * d.rate * g;
  const double ks = nl_.kappa_star;
  if (trace_.t.empty()) norm0_ = nu;
  trace_.t.push_back(s.t);
  trace_.norm.push_back(nu);
  trace_.g.push_back(g);
  trace_.g_dot.push_back(gd);
  trace_.G.push_back(std::pow(g, -ks));
  trace_.G_dot.push_back(-ks * std::pow(g, -ks - 1.0) * gd);
}

BlowupTrace BlowupAccumulator::finish(const Trajectory& traj) const {
  BlowupTrace tr = trace_;
  if (tr.t.empty()) throw PreconditionError("blow-up monitor has no samples");
  const double ks = nl_.kappa_star;
  tr.gamma_blow = ks * ((nl_.kappa - 2.0) / 4.0 - ks) * tr.g_dot.front() * tr.g_dot.front();

  double max_abs = 0.0;
  double min_gd = HUGE_VAL;
  for (double v : tr.g_dot) {
    max_abs = std::max(max_abs, std::abs(v));
    min_gd = std::min(min_gd, v);
  }
  tr.min_gdot_ratio = max_abs > 0.0 ? min_gd / max_abs : 0.0;
  tr.claim_ok = min_gd >= -settings_.claim_tol * max_abs;

  tr.envelope_ok = true;
  const double G0 = tr.G.front();
  const double Gd0 = tr.G_dot.front();
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.G[i] > G0 + Gd0 * tr.t[i] + settings_.envelope_tol * G0) {
      tr.envelope_ok = false;
      tr.detail = "G above its linear envelope at t = " + format_double(tr.t[i]);
      break;
    }
  }

  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.norm[i] >= settings_.growth_factor * norm0_) {
      tr.detected_time = tr.t[i];
      break;
    }
  }
  if (!tr.detected_time && traj.blowup_time) tr.detected_time = traj.blowup_time;
  if (tr.detected_time && t_star_) {
    tr.detected_in_time = *tr.detected_time <= (1.0 + settings_.t_star_slack) * *t_star_;
  }
  if (!tr.detected_time && tr.detail.empty()) tr.detail = "no growth past the detection threshold";
  return tr;
}

BlowupTrace blowup_monitor(const Trajectory& traj, const Background& bg, const Nonlinearity& nl,
                           const RegimeReport& certification, BlowupSettings settings) {
  BlowupAccumulator acc(bg, nl, certification, settings);
  for (const auto& s : traj.states) acc.observe(s);
  return acc.finish(traj);
}

}  // namespace flrw
