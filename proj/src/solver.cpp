#include "flrw/solver.hpp"

#include <algorithm>
#include <cmath>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::duhamel: return "duhamel";
    case Scheme::mol: return "mol";
    case Scheme::both: return "both";
  }
  return "?";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "duhamel") return Scheme::duhamel;
  if (s == "mol") return Scheme::mol;
  if (s == "both") return Scheme::both;
  throw ConfigError({"unknown scheme '" + s + "' (expected duhamel, mol or both)"});
}

void SolverConfig::validate() const {
  std::vector<std::string> v;
  if (!(dt > 0.0)) v.push_back("solver dt must be > 0");
  if (slab_steps < 1) v.push_back("solver slab must be at least one step");
  if (!(picard_tol > 0.0)) v.push_back("solver picard_tol must be > 0");
  if (picard_max < 1) v.push_back("solver picard_max must be >= 1");
  if (output_stride < 1) v.push_back("solver output_stride must be >= 1");
  if (pad < 1) v.push_back("solver pad must be >= 1");
  if (!(horizon_fraction > 0.0 && horizon_fraction <= 1.0)) v.push_back("solver horizon_fraction must be in (0, 1]");
  if (!(cfl > 0.0)) v.push_back("solver cfl must be > 0");
  if (!(min_dt > 0.0)) v.push_back("solver min_dt must be > 0");
  if (!(norm_cap_factor >= 0.0)) v.push_back("solver norm_cap_factor must be >= 0");
  if (!v.empty()) throw HypothesisError(std::move(v));
}

FieldState prepare_initial(const FieldState& s, const Nonlinearity& nl) {
  if (!(s.u.grid == s.ut.grid)) throw PreconditionError("u and u_t live on different grids");
  FieldState out = s;
  if (!nl.is_linear()) {
    dealias(out.u);
    dealias(out.ut);
  }
  return out;
}

namespace {

struct Horizon {
  double t_end;
  bool clipped;
};

Horizon clip_to_horizon(double t_end, const Background& bg, const SolverConfig& cfg) {
  if (!(t_end > 0.0)) throw PreconditionError("run length must be positive");
  const double t0 = bg.life_span();
  if (std::isfinite(t0) && t_end > cfg.horizon_fraction * t0) return {cfg.horizon_fraction * t0, true};
  return {t_end, false};
}

std::size_t step_count(double t_end, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_end / dt)));
}

// du = ut, dut = c^2 (-(k^2/a^2 + M^2) u - h(u))
class MolRhs {
 public:
  MolRhs(const GridSpec& g, const Background& bg, const Nonlinearity& nl, int pad)
      : bg_(bg), h_(g, nl, pad), k2_(g.k_sq_table()), c2_(bg.c() * bg.c()), linear_(nl.is_linear()) {}

  void operator()(double t, const SpectralField& u, const SpectralField& ut, SpectralField& du,
                  SpectralField& dut) const {
    const double a = bg_.a(t);
    const double inv_a2 = 1.0 / (a * a);
    const double m2 = bg_.mass_sq(t);
    du.coef = ut.coef;
    dut.grid = u.grid;
    dut.coef.resize(u.coef.size());
    if (linear_) {
      for (std::size_t i = 0; i < u.coef.size(); ++i) dut.coef[i] = -c2_ * (k2_[i] * inv_a2 + m2) * u.coef[i];
      return;
    }
    const SpectralField h = h_(u, a);
    for (std::size_t i = 0; i < u.coef.size(); ++i) {
      dut.coef[i] = -c2_ * ((k2_[i] * inv_a2 + m2) * u.coef[i] + h.coef[i]);
    }
  }

  // Linearised frequency of the nonlinear term, c sqrt(p |lambda| a^{-n(p-1)/2} max|u|^{p-1}).
  double nonlinear_frequency(double t, const SpectralField& u) const {
    if (linear_) return 0.0;
    const auto& nl = h_.nonlinearity();
    const double umax = lebesgue_norm(u, HUGE_VAL, 1);
    const double a = bg_.a(t);
    const double w = std::pow(a, -nl.scaling_exponent(u.grid.n_dim));
    return std::sqrt(c2_ * nl.p * std::abs(nl.lambda) * w * std::pow(umax, nl.p - 1.0));
  }

 private:
  const Background& bg_;
  NonlinearTerm h_;
  std::vector<double> k2_;
  double c2_;
  bool linear_;
};

bool finite_state(const FieldState& s) { return s.u.finite() && s.ut.finite(); }

}  // namespace

Trajectory evolve_mol(const FieldState& initial, double t_end, const Background& bg, const Nonlinearity& nl,
                      const SolverConfig& cfg, const StepObserver& observe) {
  cfg.validate();
  nl.validate();
  const auto hz = clip_to_horizon(t_end, bg, cfg);
  FieldState s = prepare_initial(initial, nl);
  s.t = 0.0;
  const MolRhs rhs(s.u.grid, bg, nl, cfg.pad);

  Trajectory traj;
  traj.states.push_back(s);
  if (observe) observe(s);

  const double norm0 = l2_norm(s.u);
  const double cap = cfg.norm_cap_factor > 0.0 ? cfg.norm_cap_factor * norm0 : HUGE_VAL;
  const std::size_t fixed_steps = step_count(hz.t_end, cfg.dt);
  const double fixed_h = hz.t_end / static_cast<double>(fixed_steps);

  SpectralField k1u(s.u.grid), k1v(s.u.grid), k2u(s.u.grid), k2v(s.u.grid), k3u(s.u.grid), k3v(s.u.grid),
      k4u(s.u.grid), k4v(s.u.grid), tu(s.u.grid), tv(s.u.grid);
  auto stage = [](SpectralField& out, const SpectralField& base, double h, const SpectralField& k) {
    out.grid = base.grid;
    out.coef.resize(base.coef.size());
    for (std::size_t i = 0; i < base.coef.size(); ++i) out.coef[i] = base.coef[i] + h * k.coef[i];
  };

  std::size_t step = 0;
  bool stored_last = true;
  while (true) {
    double h = 0.0;
    if (cfg.adaptive) {
      const double remaining = hz.t_end - s.t;
      if (remaining <= 1e-12 * std::max(1.0, hz.t_end)) break;
      h = std::min(cfg.dt, remaining);
      const double w = rhs.nonlinear_frequency(s.t, s.u);
      if (w > 0.0) h = std::min(h, cfg.cfl / w);
      if (h < cfg.min_dt) {
        traj.stop_reason = "step underflow";
        break;
      }
    } else {
      if (step >= fixed_steps) break;
      h = fixed_h;
    }
    const double t0 = s.t;
    rhs(t0, s.u, s.ut, k1u, k1v);
    stage(tu, s.u, 0.5 * h, k1u);
    stage(tv, s.ut, 0.5 * h, k1v);
    rhs(t0 + 0.5 * h, tu, tv, k2u, k2v);
    stage(tu, s.u, 0.5 * h, k2u);
    stage(tv, s.ut, 0.5 * h, k2v);
    rhs(t0 + 0.5 * h, tu, tv, k3u, k3v);
    stage(tu, s.u, h, k3u);
    stage(tv, s.ut, h, k3v);
    rhs(t0 + h, tu, tv, k4u, k4v);
    FieldState next = s;
    for (std::size_t i = 0; i < s.u.coef.size(); ++i) {
      next.u.coef[i] += h / 6.0 * (k1u.coef[i] + 2.0 * k2u.coef[i] + 2.0 * k3u.coef[i] + k4u.coef[i]);
      next.ut.coef[i] += h / 6.0 * (k1v.coef[i] + 2.0 * k2v.coef[i] + 2.0 * k3v.coef[i] + k4v.coef[i]);
    }
    ++step;
    next.t = (!cfg.adaptive && step == fixed_steps) ? hz.t_end : t0 + h;
    if (!finite_state(next)) {
      traj.blowup_time = s.t;
      traj.stop_reason = "non-finite";
      break;
    }
    s = std::move(next);
    ++traj.steps;
    if (observe) observe(s);
    stored_last = false;
    if (step % static_cast<std::size_t>(cfg.output_stride) == 0) {
      traj.states.push_back(s);
      stored_last = true;
    }
    if (l2_norm(s.u) >= cap) {
      traj.cap_time = s.t;
      traj.stop_reason = "norm cap";
      break;
    }
  }
  if (!stored_last) traj.states.push_back(s);
  if (traj.stop_reason == "end" && hz.clipped) traj.stop_reason = "horizon";
  return traj;
}

namespace {

// Cumulative composite Simpson over nodes 0..L of a uniform grid, with the
// three-point formula on odd nodes. out[0] = 0.
void cumulative_simpson(const std::vector<std::vector<Complex>>& f, double h, std::vector<std::vector<Complex>>& out) {
  const std::size_t L = f.size() - 1;
  const std::size_t n = f[0].size();
  out.assign(L + 1, std::vector<Complex>(n, Complex(0.0, 0.0)));
  if (L == 1) {
    for (std::size_t m = 0; m < n; ++m) out[1][m] = 0.5 * h * (f[0][m] + f[1][m]);
    return;
  }
  for (std::size_t j = 2; j <= L; j += 2) {
    for (std::size_t m = 0; m < n; ++m) {
      out[j][m] = out[j - 2][m] + h / 3.0 * (f[j - 2][m] + 4.0 * f[j - 1][m] + f[j][m]);
    }
  }
  for (std::size_t j = 1; j <= L; j += 2) {
    for (std::size_t m = 0; m < n; ++m) {
      if (j + 1 <= L) {
        out[j][m] = out[j - 1][m] + h / 12.0 * (5.0 * f[j - 1][m] + 8.0 * f[j][m] - f[j + 1][m]);
      } else {
        out[j][m] = out[j - 1][m] + h / 12.0 * (-f[j - 2][m] + 8.0 * f[j - 1][m] + 5.0 * f[j][m]);
      }
    }
  }
}

// State at grid step g from data and running integrals.
FieldState duhamel_state(const KernelTable& table, std::size_t g, const FieldState& data, const std::vector<Complex>& i0,
                         const std::vector<Complex>& i1, double c2) {
  FieldState s{table.time(g), SpectralField(data.u.grid), SpectralField(data.u.grid)};
  for (std::size_t m = 0; m < s.u.coef.size(); ++m) {
    const auto v = table.at(table.class_of(m), g);
    s.u.coef[m] = v.rho0 * data.u.coef[m] + v.rho1 * data.ut.coef[m] - c2 * (v.rho1 * i0[m] - v.rho0 * i1[m]);
    s.ut.coef[m] = v.drho0 * data.u.coef[m] + v.drho1 * data.ut.coef[m] - c2 * (v.drho1 * i0[m] - v.drho0 * i1[m]);
  }
  return s;
}

}  // namespace

Trajectory evolve_duhamel(const FieldState& initial, double t_end, const Background& bg, const Nonlinearity& nl,
                          const SolverConfig& cfg, const StepObserver& observe) {
  cfg.validate();
  nl.validate();
  const auto hz = clip_to_horizon(t_end, bg, cfg);
  const double t1 = bg.mass_horizon();
  if (hz.t_end > t1) {
    throw PreconditionError("Duhamel needs T <= T1 = " + format_double(t1) + "; use the MoL scheme past T1");
  }
  if (!(bg.mass_sq(0.0) > 0.0) || !(bg.mass_sq(hz.t_end) > 0.0)) {
    throw PreconditionError("Duhamel needs M > 0 on [0, T]");
  }
  const FieldState data = prepare_initial(initial, nl);
  const GridSpec& g = data.u.grid;
  // TODO: cfg.adaptive is ignored here; the kernel table is built on one uniform step.
  const std::size_t steps = step_count(hz.t_end, cfg.dt);
  const double h = hz.t_end / static_cast<double>(steps);
  auto table = std::make_shared<KernelTable>(g, bg, h);
  table->ensure(steps);
  const double c2 = bg.c() * bg.c();
  const NonlinearTerm hterm(g, nl, cfg.pad);
  const std::size_t n = g.size();

  Trajectory traj;
  traj.table = table;
  std::vector<Complex> i0(n), i1(n);

  FieldState start = duhamel_state(*table, 0, data, i0, i1, c2);
  start.t = 0.0;
  traj.states.push_back(start);
  traj.integrals.push_back({i0, i1});
  if (observe) observe(start);
  SpectralField h_start = hterm(start.u, bg.a(0.0));

  const std::size_t stride = static_cast<std::size_t>(cfg.output_stride);
  for (std::size_t a = 0; a < steps; a += static_cast<std::size_t>(cfg.slab_steps)) {
    const std::size_t b = std::min(steps, a + static_cast<std::size_t>(cfg.slab_steps));
    const std::size_t len = b - a;
    // Initial guess: continuation with no forcing inside the slab.
    std::vector<SpectralField> u_nodes(len + 1);
    for (std::size_t j = 0; j <= len; ++j) u_nodes[j] = duhamel_state(*table, a + j, data, i0, i1, c2).u;
    double scale = 0.0;
    for (const auto& u : u_nodes) scale = std::max(scale, l2_norm(u));

    std::vector<std::vector<Complex>> f0(len + 1, std::vector<Complex>(n)), f1(len + 1, std::vector<Complex>(n));
    std::vector<std::vector<Complex>> c0, c1;
    std::vector<SpectralField> h_nodes(len + 1);
    h_nodes[0] = h_start;
    double prev = -1.0;
    double worst_ratio = 0.0;
    int bad = 0;
    int it = 0;
    bool converged = false;
    while (it < cfg.picard_max) {
      ++it;
      for (std::size_t j = 1; j <= len; ++j) h_nodes[j] = hterm(u_nodes[j], bg.a(table->time(a + j)));
      for (std::size_t j = 0; j <= len; ++j) {
        for (std::size_t m = 0; m < n; ++m) {
          const auto v = table->at(table->class_of(m), a + j);
          f0[j][m] = v.rho0 * h_nodes[j].coef[m];
          f1[j][m] = v.rho1 * h_nodes[j].coef[m];
        }
      }
      cumulative_simpson(f0, h, c0);
      cumulative_simpson(f1, h, c1);
      double dist = 0.0;
      std::vector<Complex> j0(n), j1(n);
      for (std::size_t j = 1; j <= len; ++j) {
        for (std::size_t m = 0; m < n; ++m) {
          j0[m] = i0[m] + c0[j][m];
          j1[m] = i1[m] + c1[j][m];
        }
        SpectralField next = duhamel_state(*table, a + j, data, j0, j1, c2).u;
        dist = std::max(dist, l2_norm(next - u_nodes[j]));
        u_nodes[j] = std::move(next);
      }
      scale = std::max(scale, l2_norm(u_nodes[len]));
      const double tol = cfg.picard_tol * std::max(1.0, scale);
      if (prev > 0.0 && dist > 1e-13 * std::max(1.0, scale)) {
        const double ratio = dist / prev;
        worst_ratio = std::max(worst_ratio, ratio);
        bad = ratio >= 1.0 ? bad + 1 : 0;
        if (bad >= 3) {
          throw NumericalError("Picard iteration is not contracting on the slab at t = " + format_double(table->time(a)) +
                               "; use a smaller slab");
        }
      }
      prev = dist;
      if (dist <= tol || nl.is_linear()) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("Picard iteration did not reach tolerance within " + std::to_string(cfg.picard_max) +
                           " iterations on the slab at t = " + format_double(table->time(a)));
    }
    traj.contraction_ratios.push_back(worst_ratio);
    traj.picard_iterations.push_back(it);

    // One more evaluation so the integrals match the accepted nodes.
    for (std::size_t j = 1; j <= len; ++j) h_nodes[j] = hterm(u_nodes[j], bg.a(table->time(a + j)));
    for (std::size_t j = 0; j <= len; ++j) {
      for (std::size_t m = 0; m < n; ++m) {
        const auto v = table->at(table->class_of(m), a + j);
        f0[j][m] = v.rho0 * h_nodes[j].coef[m];
        f1[j][m] = v.rho1 * h_nodes[j].coef[m];
      }
    }
    cumulative_simpson(f0, h, c0);
    cumulative_simpson(f1, h, c1);
    std::vector<Complex> j0(n), j1(n);
    for (std::size_t j = 1; j <= len; ++j) {
      for (std::size_t m = 0; m < n; ++m) {
        j0[m] = i0[m] + c0[j][m];
        j1[m] = i1[m] + c1[j][m];
      }
      FieldState s = duhamel_state(*table, a + j, data, j0, j1, c2);
      if (a + j == steps) s.t = hz.t_end;
      if (!finite_state(s)) throw NumericalError("Duhamel iterate became non-finite at t = " + format_double(s.t));
      ++traj.steps;
      if (observe) observe(s);
      if ((a + j) % stride == 0 || a + j == steps) {
        traj.states.push_back(s);
        traj.integrals.push_back({j0, j1});
      }
    }
    i0 = j0;
    i1 = j1;
    h_start = h_nodes[len];
  }
  if (hz.clipped) traj.stop_reason = "horizon";
  return traj;
}

Trajectory evolve_free(const FieldState& initial, double t_end, const Background& bg, const SolverConfig& cfg) {
  cfg.validate();
  const auto hz = clip_to_horizon(t_end, bg, cfg);
  const std::size_t steps = step_count(hz.t_end, cfg.dt);
  const double h = hz.t_end / static_cast<double>(steps);
  auto table = std::make_shared<KernelTable>(initial.u.grid, bg, h);
  table->ensure(steps);
  const std::vector<Complex> zero(initial.u.coef.size());
  Trajectory traj;
  traj.table = table;
  for (std::size_t g = 0; g <= steps; ++g) {
    if (g % static_cast<std::size_t>(cfg.output_stride) != 0 && g != steps) continue;
    FieldState s = duhamel_state(*table, g, initial, zero, zero, 1.0);
    if (g == steps) s.t = hz.t_end;
    traj.states.push_back(std::move(s));
  }
  traj.steps = steps;
  if (hz.clipped) traj.stop_reason = "horizon";
  return traj;
}

double ScatteringProfile::window_max(double frac_lo, double frac_hi) const {
  double m = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= frac_lo * t_max - 1e-12 && t[i] <= frac_hi * t_max + 1e-12) {
      m = std::max(m, residual[i]);
      any = true;
    }
  }
  if (!any) throw PreconditionError("scattering window holds no samples");
  return m;
}

ScatteringProfile scattering_profile(const Trajectory& traj, const Background& bg, double mu) {
  if (!traj.table || traj.integrals.size() != traj.states.size() || traj.states.empty()) {
    throw PreconditionError("scattering profile needs a Duhamel trajectory with its kernel table");
  }
  const KernelTable& table = *traj.table;
  const double c2 = bg.c() * bg.c();
  const FieldState& first = traj.states.front();
  const DuhamelIntegrals& last = traj.integrals.back();
  const std::size_t n = first.u.coef.size();

  ScatteringProfile prof;
  prof.mu = mu;
  prof.t_max = traj.states.back().t;
  prof.v0 = first.u;
  prof.v1 = first.ut;
  for (std::size_t m = 0; m < n; ++m) {
    prof.v0.coef[m] += c2 * last.i1[m];
    prof.v1.coef[m] -= c2 * last.i0[m];
  }

  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double t = traj.states[k].t;
    const auto g = table.index_of(t);
    if (!g || *g > table.steps()) throw PreconditionError("kernel table missing time " + format_double(t));
    SpectralField d(first.u.grid), dt(first.u.grid);
    for (std::size_t m = 0; m < n; ++m) {
      const auto v = table.at(table.class_of(m), *g);
      const Complex di0 = last.i0[m] - traj.integrals[k].i0[m];
      const Complex di1 = last.i1[m] - traj.integrals[k].i1[m];
      d.coef[m] = c2 * (v.rho1 * di0 - v.rho0 * di1);
      dt.coef[m] = c2 * (v.drho1 * di0 - v.drho0 * di1);
    }
    const double weight = std::sqrt(std::max(0.0, bg.mass_sq(t))) / bg.a(t);
    double r = 0.0;
    for (const SpectralField* f : {&d, &dt}) {
      r = std::max(r, sobolev_norm(*f, mu - 1.0, false));
      r = std::max(r, weight * sobolev_norm(*f, mu, false));
    }
    prof.t.push_back(t);
    prof.residual.push_back(r);
  }
  return prof;
}

}  // namespace flrw
