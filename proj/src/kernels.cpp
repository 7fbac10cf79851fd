#include "flrw/kernels.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw {

namespace {

constexpr double kWronskianLimit = 1e-6;

struct Coefficients {
  double inv_a2;
  double m2;
};

Coefficients coefficients(double t, const Background& bg) {
  const double a = bg.a(t);
  return {1.0 / (a * a), bg.mass_sq(t)};
}

// One RK4 step of y'' = -alpha y for the pair (rho0, rho1) sharing alpha.
void rk4_step(std::array<double, 4>& y, double h, double al0, double al_mid, double al1) {
  auto rhs = [](const std::array<double, 4>& v, double al) {
    return std::array<double, 4>{v[1], -al * v[0], v[3], -al * v[2]};
  };
  auto shifted = [](const std::array<double, 4>& v, const std::array<double, 4>& k, double s) {
    return std::array<double, 4>{v[0] + s * k[0], v[1] + s * k[1], v[2] + s * k[2], v[3] + s * k[3]};
  };
  const auto k1 = rhs(y, al0);
  const auto k2 = rhs(shifted(y, k1, 0.5 * h), al_mid);
  const auto k3 = rhs(shifted(y, k2, 0.5 * h), al_mid);
  const auto k4 = rhs(shifted(y, k3, h), al1);
  for (int i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

std::size_t step_count(double t_end, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  if (!(t_end > 0.0)) throw PreconditionError("kernel horizon must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_end / dt)));
}

bool within(double lhs, double rhs, double slack) { return lhs <= rhs + slack * (1.0 + std::abs(rhs)); }

void record(BoundReport& r, double t, double k_sq, const char* which, double lhs, double rhs, double slack) {
  ++r.checked;
  if (rhs > 0.0) r.worst_margin = std::max(r.worst_margin, lhs / rhs);
  if (!within(lhs, rhs, slack)) r.violations.push_back({t, k_sq, which, lhs, rhs});
}

}  // namespace

double alpha(double t, double k_sq, const Background& bg) {
  const double c2 = bg.c() * bg.c();
  const double a = bg.a(t);
  return c2 * k_sq / (a * a) + c2 * bg.mass_sq(t);
}

double alpha_dot(double t, double k_sq, const Background& bg) {
  const double c2 = bg.c() * bg.c();
  const auto d = bg.scale(t);
  return -2.0 * c2 * d.a_dot * k_sq / (d.a * d.a * d.a) + 2.0 * c2 * bg.mass_mass_dot(t);
}

ModeKernel solve_mode(double k_sq, double t_end, const Background& bg, double dt) {
  const std::size_t steps = step_count(t_end, dt);
  const double h = t_end / static_cast<double>(steps);
  ModeKernel m;
  m.k_sq = k_sq;
  m.alpha0 = alpha(0.0, k_sq, bg);
  m.t.reserve(steps + 1);
  std::array<double, 4> y{1.0, 0.0, 0.0, 1.0};
  auto push = [&](double t, double al) {
    m.t.push_back(t);
    m.alpha.push_back(al);
    m.rho0.push_back(y[0]);
    m.drho0.push_back(y[1]);
    m.rho1.push_back(y[2]);
    m.drho1.push_back(y[3]);
    m.max_wronskian_dev = std::max(m.max_wronskian_dev, std::abs(y[0] * y[3] - y[2] * y[1] - 1.0));
  };
  double al0 = m.alpha0;
  push(0.0, al0);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t0 = h * static_cast<double>(i);
    const double t1 = i + 1 == steps ? t_end : h * static_cast<double>(i + 1);
    const double al_mid = alpha(t0 + 0.5 * h, k_sq, bg);
    const double al1 = alpha(t1, k_sq, bg);
    rk4_step(y, t1 - t0, al0, al_mid, al1);
    push(t1, al1);
    al0 = al1;
  }
  if (m.max_wronskian_dev > kWronskianLimit) {
    throw NumericalError("Wronskian drift " + format_double(m.max_wronskian_dev) + " at |k|^2 = " +
                         format_double(k_sq) + "; reduce dt");
  }
  return m;
}

double EnvelopeConstants::eta_at(double tq) const {
  if (t.empty()) throw PreconditionError("empty envelope");
  if (tq <= t.front()) return eta.front();
  if (tq >= t.back()) return eta.back();
  const auto it = std::upper_bound(t.begin(), t.end(), tq);
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double w = (tq - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - w) * eta[i - 1] + w * eta[i];
}

EnvelopeConstants envelope_constants(double t_end, const Background& bg, double dt) {
  const std::size_t steps = step_count(t_end, dt);
  const double h = t_end / static_cast<double>(steps);
  EnvelopeConstants env;
  env.a0 = bg.a0();
  env.c = bg.c();
  const double t1 = bg.mass_horizon();
  const double m2_0 = bg.mass_sq(0.0);
  if (!(m2_0 > 0.0)) {
    throw PreconditionError("M(0)^2 <= 0: envelope needs M > 0 (threshold time T1 = " + format_double(t1) + ")");
  }
  env.m0 = std::sqrt(m2_0);
  env.m_star = env.m0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = i == steps ? t_end : h * static_cast<double>(i);
    const double m2 = bg.mass_sq(t);
    if (!(m2 > 0.0)) {
      throw PreconditionError("M^2 <= 0 at t = " + format_double(t) + ", past the threshold time T1 = " +
                              format_double(t1));
    }
    const auto d = bg.scale(t);
    if (d.a_dot < -1e-14 * d.a) throw PreconditionError("envelope needs adot >= 0; adot < 0 at t = " + format_double(t));
    const double m = std::sqrt(m2);
    if (bg.mass_mass_dot(t) > 1e-14 * std::max(1.0, m2)) {
      throw PreconditionError("envelope needs Mdot <= 0; Mdot > 0 at t = " + format_double(t));
    }
    env.m_star = std::min(env.m_star, m);
    const double eta = env.m0 * d.a / (m * env.a0);
    env.t.push_back(t);
    env.eta.push_back(eta);
  }

  const double lo = std::min(1.0 / env.a0, env.m0);
  const double hi = std::max(1.0 / env.a0, env.m0);
  env.n1 = hi / env.m_star;
  env.n2 = hi;
  env.n3 = 1.0 / lo;
  env.n4 = hi / (env.m_star * lo);

  for (double k_sq : {0.0, 0.25, 1.0, 10.0, 1e2, 1e4}) {
    const double s = std::sqrt(alpha(0.0, k_sq, bg));
    const double jk = japanese(k_sq);
    if (!within(env.c * lo * jk, s, 1e-12) || !within(s, env.c * hi * jk, 1e-12)) {
      throw NumericalError("sqrt(alpha(0,k)) outside its <k> bracket at |k|^2 = " + format_double(k_sq));
    }
  }
  return env;
}

void BoundReport::merge(const BoundReport& o) {
  checked += o.checked;
  worst_margin = std::max(worst_margin, o.worst_margin);
  violations.insert(violations.end(), o.violations.begin(), o.violations.end());
  notes.insert(notes.end(), o.notes.begin(), o.notes.end());
}

BoundReport verify_mode_bounds(const ModeKernel& mode, const EnvelopeConstants& env, const Background& bg,
                               double slack) {
  BoundReport r;
  for (std::size_t i = 0; i < mode.t.size(); ++i) {
    if (mode.alpha[i] < 0.0 || alpha_dot(mode.t[i], mode.k_sq, bg) > 1e-12 * std::max(1.0, mode.alpha[i])) {
      r.notes.push_back("hypothesis alpha >= 0, d/dt alpha <= 0 not met at t = " + format_double(mode.t[i]) +
                        "; bound checks skipped for |k|^2 = " + format_double(mode.k_sq));
      return r;
    }
  }
  const double c = env.c;
  const double jk = japanese(mode.k_sq);
  for (std::size_t i = 0; i < mode.t.size(); ++i) {
    const double t = mode.t[i];
    const double eta = env.eta_at(t);
    const double al = mode.alpha[i];
    const double r0 = std::abs(mode.rho0[i]);
    const double d0 = std::abs(mode.drho0[i]);
    const double r1 = std::abs(mode.rho1[i]);
    const double d1 = std::abs(mode.drho1[i]);
    record(r, t, mode.k_sq, "raw |rho0| <= sqrt(alpha0/alpha)", r0, std::sqrt(mode.alpha0 / al), slack);
    record(r, t, mode.k_sq, "raw |rho0'| <= sqrt(alpha0)", d0, std::sqrt(mode.alpha0), slack);
    record(r, t, mode.k_sq, "raw |rho1| <= 1/sqrt(alpha)", r1, 1.0 / std::sqrt(al), slack);
    record(r, t, mode.k_sq, "|rho0| <= min{eta, N1<k>}", r0, std::min(eta, env.n1 * jk), slack);
    record(r, t, mode.k_sq, "|rho0'| <= c N2 <k>", d0, c * env.n2 * jk, slack);
    record(r, t, mode.k_sq, "|rho1| <= min{N3 eta/<k>, N4}/c", r1, std::min(env.n3 * eta / jk, env.n4) / c, slack);
    record(r, t, mode.k_sq, "|rho1'| <= 1", d1, 1.0, slack);
  }
  return r;
}

KernelTable::KernelTable(const GridSpec& g, Background bg, double dt) : grid_(g), bg_(std::move(bg)), dt_(dt) {
  g.validate();
  if (!(dt > 0.0)) throw PreconditionError("kernel table needs dt > 0");
  std::map<double, std::size_t> classes;
  mode_class_.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k2 = g.k_sq(i);
    auto [it, inserted] = classes.emplace(k2, class_k_sq_.size());
    if (inserted) class_k_sq_.push_back(k2);
    mode_class_[i] = it->second;
  }
  rows_ = 1;
  data_.resize(class_k_sq_.size() * 4);
  for (std::size_t c = 0; c < class_k_sq_.size(); ++c) {
    data_[c * 4 + 0] = 1.0;
    data_[c * 4 + 1] = 0.0;
    data_[c * 4 + 2] = 0.0;
    data_[c * 4 + 3] = 1.0;
  }
}

double KernelTable::alpha_at(std::size_t cls, double inv_a2, double m2) const {
  const double c2 = bg_.c() * bg_.c();
  return c2 * class_k_sq_[cls] * inv_a2 + c2 * m2;
}

void KernelTable::ensure(std::size_t steps) {
  if (steps + 1 <= rows_) return;
  const std::size_t nc = class_k_sq_.size();
  data_.resize((steps + 1) * nc * 4);
  for (std::size_t i = rows_ - 1; i < steps; ++i) {
    const double t0 = time(i);
    const auto c0 = coefficients(t0, bg_);
    const auto cm = coefficients(t0 + 0.5 * dt_, bg_);
    const auto c1 = coefficients(time(i + 1), bg_);
    for (std::size_t c = 0; c < nc; ++c) {
      const double* src = &data_[(i * nc + c) * 4];
      std::array<double, 4> y{src[0], src[1], src[2], src[3]};
      rk4_step(y, dt_, alpha_at(c, c0.inv_a2, c0.m2), alpha_at(c, cm.inv_a2, cm.m2), alpha_at(c, c1.inv_a2, c1.m2));
      double* dst = &data_[((i + 1) * nc + c) * 4];
      std::copy(y.begin(), y.end(), dst);
      max_wronskian_dev_ = std::max(max_wronskian_dev_, std::abs(y[0] * y[3] - y[2] * y[1] - 1.0));
    }
  }
  rows_ = steps + 1;
  if (max_wronskian_dev_ > kWronskianLimit) {
    throw NumericalError("kernel table Wronskian drift " + format_double(max_wronskian_dev_) + "; reduce dt");
  }
}

KernelTable::Values KernelTable::at(std::size_t cls, std::size_t step) const {
  if (step >= rows_) throw PreconditionError("kernel table does not hold step " + std::to_string(step));
  const double* v = &data_[(step * class_k_sq_.size() + cls) * 4];
  return {v[0], v[1], v[2], v[3]};
}

std::optional<std::size_t> KernelTable::index_of(double t) const {
  if (!(t >= 0.0)) return std::nullopt;
  const double x = t / dt_;
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9) return std::nullopt;
  return static_cast<std::size_t>(r);
}

std::string to_string(KernelOp op) {
  switch (op) {
    case KernelOp::k0: return "K0";
    case KernelOp::k1: return "K1";
    case KernelOp::k2: return "K2";
    case KernelOp::dk0: return "dK0";
    case KernelOp::dk1: return "dK1";
    case KernelOp::dk2: return "dK2";
  }
  return "?";
}

SpectralField apply_kernel(KernelOp op, const SpectralField& phi, const KernelTable& table, double t, double s) {
  if (!(phi.grid == table.grid())) throw PreconditionError("field and kernel table use different grids");
  const auto it = table.index_of(t);
  if (!it) throw PreconditionError("kernel time " + format_double(t) + " is not on the table grid");
  if (*it > table.steps()) throw PreconditionError("kernel table does not reach t = " + format_double(t));
  std::size_t is = 0;
  const bool two_time = op == KernelOp::k2 || op == KernelOp::dk2;
  if (two_time) {
    const auto js = table.index_of(s);
    if (!js) throw PreconditionError("kernel time " + format_double(s) + " is not on the table grid");
    if (*js > table.steps()) throw PreconditionError("kernel table does not reach s = " + format_double(s));
    is = *js;
    if (op == KernelOp::k2 && is == *it) return SpectralField(phi.grid);
  }
  SpectralField out(phi.grid);
  for (std::size_t i = 0; i < phi.coef.size(); ++i) {
    const std::size_t cls = table.class_of(i);
    const auto vt = table.at(cls, *it);
    double m = 0.0;
    switch (op) {
      case KernelOp::k0: m = vt.rho0; break;
      case KernelOp::k1: m = vt.rho1; break;
      case KernelOp::dk0: m = vt.drho0; break;
      case KernelOp::dk1: m = vt.drho1; break;
      case KernelOp::k2: {
        const auto vs = table.at(cls, is);
        m = vt.rho1 * vs.rho0 - vt.rho0 * vs.rho1;
        break;
      }
      case KernelOp::dk2: {
        const auto vs = table.at(cls, is);
        m = vt.drho1 * vs.rho0 - vt.drho0 * vs.rho1;
        break;
      }
    }
    out.coef[i] = m * phi.coef[i];
  }
  return out;
}

BoundReport check_operator_bounds(const KernelTable& table, const EnvelopeConstants& env,
                                  const std::vector<double>& times, int fields, std::uint64_t seed, double slack) {
  BoundReport r;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> decay(0.0, 2.0);
  const GridSpec& g = table.grid();
  const double c = env.c;
  const double n13 = std::max(env.n1 * env.n3, env.n4);
  const double n23 = std::max(1.0, env.n2 * env.n3);
  const double n124 = std::max(env.n1, env.n2 * env.n4);

  for (int f = 0; f < fields; ++f) {
    SpectralField phi(g);
    const double beta = decay(rng);
    for (std::size_t i = 0; i < phi.coef.size(); ++i) {
      const double w = std::pow(japanese(g.k_sq(i)), -beta);
      phi.coef[i] = w * Complex(gauss(rng), gauss(rng));
    }
    const double l2 = l2_norm(phi);
    const double h1 = sobolev_norm(phi, 1.0, false);
    const double hm1 = sobolev_norm(phi, -1.0, false);

    for (double t : times) {
      const double et = env.eta_at(t);
      record(r, t, -1.0, "op.1 K0", l2_norm(apply_kernel(KernelOp::k0, phi, table, t)), std::min(et * l2, env.n1 * h1),
             slack);
      record(r, t, -1.0, "op.2 dK0", l2_norm(apply_kernel(KernelOp::dk0, phi, table, t)), c * env.n2 * h1, slack);
      record(r, t, -1.0, "op.3 K1", l2_norm(apply_kernel(KernelOp::k1, phi, table, t)),
             std::min(env.n3 * et * hm1, env.n4 * l2) / c, slack);
      record(r, t, -1.0, "op.4 dK1", l2_norm(apply_kernel(KernelOp::dk1, phi, table, t)), l2, slack);

      for (double s : times) {
        const double es = env.eta_at(s);
        const auto k0s = apply_kernel(KernelOp::k0, phi, table, s);
        const auto k1s = apply_kernel(KernelOp::k1, phi, table, s);
        record(r, t, -1.0, "op.5 K1 K0", l2_norm(apply_kernel(KernelOp::k1, k0s, table, t)),
               std::min({env.n3 * et * es * hm1, env.n1 * env.n3 * et * l2, env.n4 * es * l2, env.n1 * env.n4 * h1}) / c,
               slack);
        record(r, t, -1.0, "op.6 dK1 K0", l2_norm(apply_kernel(KernelOp::dk1, k0s, table, t)),
               std::min(es * l2, env.n1 * h1), slack);
        record(r, t, -1.0, "op.7 dK0 K1", l2_norm(apply_kernel(KernelOp::dk0, k1s, table, t)),
               std::min(env.n2 * env.n3 * es * l2, env.n2 * env.n4 * h1), slack);
        record(r, t, -1.0, "op.8 K2", l2_norm(apply_kernel(KernelOp::k2, phi, table, t, s)),
               2.0 / c * std::min({env.n3 * et * es * hm1, n13 * et * l2, n13 * es * l2, env.n1 * env.n4 * h1}), slack);
        record(r, t, -1.0, "op.9 dK2", l2_norm(apply_kernel(KernelOp::dk2, phi, table, t, s)),
               2.0 * std::min(n23 * es * l2, n124 * h1), slack);
      }
    }
  }
  return r;
}

}  // namespace flrw
