#include "flrw/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "flrw/errors.hpp"

namespace flrw {

namespace {

constexpr double kEqTol = 1e-12;

bool same(double a, double b) { return std::abs(a - b) <= kEqTol * std::max({1.0, std::abs(a), std::abs(b)}); }

// -1, 0, +1 for p below / at / above an extended threshold.
int compare_p(double p, const ExtendedReal& thr) {
  if (thr.is_infinite()) return -1;
  if (same(p, thr.value())) return 0;
  return p < thr.value() ? -1 : 1;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

// ---------------------------------------------------------------- exponents

ExtendedReal ExponentSet::q() const { return inv_q == 0.0 ? ExtendedReal::infinity() : ExtendedReal(1.0 / inv_q); }

ExtendedReal ExponentSet::q_star() const {
  return inv_qstar == 0.0 ? ExtendedReal::infinity() : ExtendedReal(1.0 / inv_qstar);
}

double ExponentSet::qstar() const {
  if (!qstar_finite()) throw PreconditionError("q_* is infinite here");
  return 1.0 / inv_qstar;
}

double default_inv_q(int n, double mu0, double p) {
  const double s = (p - 1.0) * (n - 2.0 * mu0);
  if (s <= 0.0) return 0.5;
  return std::min(0.5, 2.0 / s);
}

ExponentSet exponent_set(const CosmologyParams& cosmo, SobolevOrders orders, double p, std::optional<double> inv_q) {
  cosmo.validate();
  const int n = cosmo.n;
  const double mu0 = orders.mu0;
  std::vector<std::string> bad;
  if (!(mu0 >= 0.0)) bad.push_back("mu0 >= 0 (got " + fmt(mu0) + ")");
  if (n <= 2 && !(mu0 < n / 2.0)) bad.push_back("mu0 < n/2 (got mu0 = " + fmt(mu0) + ")");
  if (n >= 3 && !(mu0 < n / 2.0 - 1.0)) bad.push_back("mu0 < n/2 - 1 (got mu0 = " + fmt(mu0) + ")");
  if (!(orders.mu >= mu0)) bad.push_back("mu >= mu0 (got mu = " + fmt(orders.mu) + ")");
  if (!(p >= 1.0) || !std::isfinite(p)) bad.push_back("p >= 1 (got " + fmt(p) + ")");
  if (!bad.empty()) throw HypothesisError(bad);

  ExponentSet e;
  e.n = n;
  e.mu0 = mu0;
  e.mu = orders.mu;
  e.p = p;
  e.sigma = cosmo.sigma;
  const double nm = n - 2.0 * mu0;

  e.p_mu0 = (n >= 3 && nm - 2.0 > 0.0) ? ExtendedReal(1.0 + 2.0 / (nm - 2.0)) : ExtendedReal::infinity();
  if (n >= 3 && compare_p(p, e.p_mu0) > 0) bad.push_back("p <= p(mu0) = " + e.p_mu0.to_string());

  const double q_cap = (p - 1.0) * nm > 0.0 ? std::min(0.5, 2.0 / ((p - 1.0) * nm)) : 0.5;
  e.inv_q = inv_q.value_or(default_inv_q(n, mu0, p));
  if (!(e.inv_q >= 0.0)) bad.push_back("1/q >= 0 (got " + fmt(e.inv_q) + ")");
  if (e.inv_q > q_cap * (1.0 + kEqTol)) {
    bad.push_back("1/q <= min{1/2, 2/((p-1)(n-2mu0))} = " + fmt(q_cap) + " (got " + fmt(e.inv_q) + ")");
  }
  if (!bad.empty()) throw HypothesisError(bad);
  e.inv_q = std::min(e.inv_q, q_cap);

  e.inv_qstar = 1.0 - (p - 1.0) * nm * e.inv_q / 2.0;
  if (std::abs(e.inv_qstar) < 1e-14) e.inv_qstar = 0.0;
  e.theta = (p - 1.0) * nm / (2.0 * p);
  e.delta = 1.0 - (p - 1.0) * (nm - 2.0) / 2.0;
  if (std::abs(e.delta) < 1e-14) e.delta = 0.0;
  e.inv_r_star = 0.5 - e.theta / n;
  e.inv_r_sharp = 0.5 - (mu0 + e.theta) / n;

  const double s1 = n * (1.0 + cosmo.sigma);
  e.omega = -mu0 * (p - 1.0) + s1 / 2.0;
  if (cosmo.sigma != -1.0) {
    e.zeta = 1.0 - 2.0 * mu0 * (p - 1.0) / s1;
    if (e.qstar_finite()) {
      const double qs = 1.0 / e.inv_qstar;
      e.gamma = (2.0 * mu0 / s1 - nm * e.inv_q / 2.0) * (p - 1.0) * qs;
    }
  }
  e.p1 = mu0 > 0.0 ? ExtendedReal::from_double(1.0 + s1 / (2.0 * mu0)) : ExtendedReal::infinity();
  e.p2 = ExtendedReal(1.0 + 4.0 / nm);

  const double den = 4.0 + cosmo.sigma * n * n;
  if (den != 0.0) e.p_star = 1.0 + 4.0 * n * (1.0 + cosmo.sigma) / den;
  if (cosmo.hubble != 0.0) {
    const double r = 2.0 * cosmo.mass * cosmo.c / cosmo.hubble;
    const double den2 = den + r * r;
    if (den2 != 0.0) e.p_sharp = 1.0 + 4.0 * n * (1.0 + cosmo.sigma) / den2;
  }
  return e;
}

// ---------------------------------------------------------------- B(T)

int closed_form_family(const CosmologyParams& cosmo, const ExponentSet& e) {
  const double H = cosmo.hubble;
  const double s = cosmo.sigma;
  const bool qfin = e.qstar_finite();
  if (H == 0.0) return e.inv_qstar == 1.0 ? 1 : 0;
  if (H < 0.0) return 0;
  if (qfin) {
    if (s == -1.0) return (e.mu0 > 0.0 && e.p > 1.0) ? 5 : 6;
    if (s < -1.0) return 3;
    if (s >= 0.0) {
      if (e.mu0 == 0.0) return 3;
      const int cmp = compare_p(e.p, e.p1);
      return cmp > 0 ? 2 : (cmp == 0 ? 4 : 3);
    }
    return 0;
  }
  if (s >= 0.0) {
    if (e.mu0 == 0.0) return 7;
    return compare_p(e.p, e.p1) < 0 ? 7 : 8;
  }
  if (s <= -1.0) return 8;
  return 0;
}

std::string describe_family(int family) {
  switch (family) {
    case 1: return "static: B = T";
    case 2: return "saturating power: B1 [1 - (1+bT)^{1-gamma}]^{1/q*}";
    case 3: return "power: B1 |(1+bT)^{1-gamma} - 1|^{1/q*}";
    case 4: return "logarithmic: B2 [log(1+bT)]^{1/q*}";
    case 5: return "de Sitter saturating: B3 {1 - exp(-mu0(p-1)HTq*)}^{1/q*}";
    case 6: return "de Sitter linear: (2HT)^{1/q*}/(2H)";
    case 7: return "sup, growing: (2H)^{-1} (a(T)/a0)^omega";
    case 8: return "sup, constant: (2H)^{-1}";
    default: return "uncovered";
  }
}

namespace {

// (a/a0)^{-mu0(p-1)} (w adot/a)^{1/q_* - 1}
std::function<double(double)> b_integrand(const CosmologyParams& cosmo, const ExponentSet& e, double rate_factor,
                                          bool absolute_a) {
  return [&cosmo, &e, rate_factor, absolute_a](double t) {
    const auto d = scale_derivatives(t, cosmo);
    const double base_a = absolute_a ? d.a : d.a / cosmo.a0;
    const double expo = e.inv_qstar - 1.0;
    const double w = expo == 0.0 ? 1.0 : std::pow(rate_factor * d.rate, expo);
    return std::pow(base_a, -e.mu0 * (e.p - 1.0)) * w;
  };
}

ExtendedReal quadrature_norm(double t_end, const CosmologyParams& cosmo, const ExponentSet& e, double rate_factor,
                             bool absolute_a, QuadratureTolerance tol) {
  if (cosmo.hubble < 0.0) throw PreconditionError("B(T) needs adot >= 0 (H >= 0)");
  if (cosmo.hubble == 0.0 && e.inv_qstar != 1.0) return ExtendedReal::infinity();
  if (!(t_end < cosmo.life_span())) throw DomainError("B(T) needs T < T0");
  // Power-law tails over long windows: integrate in log time past the expansion scale.
  const double s1 = std::abs(cosmo.n * (1.0 + cosmo.sigma)) / 2.0;
  const double scale = cosmo.hubble > 0.0 ? 1.0 / ((1.0 + s1) * cosmo.hubble) : 0.0;
  return ExtendedReal(lq_norm(b_integrand(cosmo, e, rate_factor, absolute_a), t_end, e.inv_qstar, tol, scale));
}

double b_closed(int family, double T, const CosmologyParams& cosmo, const ExponentSet& e, const RegimeConstants& k) {
  const double H = cosmo.hubble;
  const double b = cosmo.n * (1.0 + cosmo.sigma) * H / 2.0;
  const double iq = e.inv_qstar;
  switch (family) {
    case 1: return T;
    case 2: return *k.B1 * std::pow(-std::expm1((1.0 - *e.gamma) * std::log1p(b * T)), iq);
    case 3: {
      const double x = (1.0 - *e.gamma) * std::log1p(b * T);
      const double v = std::abs(std::expm1(x));
      if (std::isfinite(v)) return *k.B1 * std::pow(v, iq);
      // lam^{1-gamma} overflows before its 1/q* root does
      return *k.B1 * std::exp(iq * (x + std::log(-std::expm1(-x))));
    }
    case 4: return *k.B2 * std::pow(std::log1p(b * T), iq);
    case 5: return *k.B3 * std::pow(-std::expm1(-e.mu0 * (e.p - 1.0) * H * T * e.qstar()), iq);
    case 6: return std::pow(2.0 * H * T, iq) / (2.0 * H);
    case 7: return std::pow(scale_factor(T, cosmo) / cosmo.a0, e.omega) / (2.0 * H);
    case 8: return 1.0 / (2.0 * H);
    default: throw PreconditionError("no closed form for these parameters");
  }
}

}  // namespace

BValue b_integral(double t_end, const CosmologyParams& cosmo, const ExponentSet& e, BMethod method,
                  QuadratureTolerance tol) {
  BValue v;
  v.family = closed_form_family(cosmo, e);
  v.method = method;
  if (method == BMethod::quadrature) {
    v.value = quadrature_norm(t_end, cosmo, e, 2.0, false, tol);
    return v;
  }
  if (v.family == 0) throw PreconditionError("B(T): parameters outside every closed-form family");
  if (!(t_end >= 0.0)) throw DomainError("B(T) needs T >= 0");
  if (!(t_end < cosmo.life_span())) throw DomainError("B(T) needs T < T0");
  const RegimeConstants k = regime_constants(cosmo, e, 1.0);
  v.value = ExtendedReal(b_closed(v.family, t_end, cosmo, e, k));
  return v;
}

double b_integral_literal(double t_end, const CosmologyParams& cosmo, const ExponentSet& e, QuadratureTolerance tol) {
  return quadrature_norm(t_end, cosmo, e, 1.0, false, tol).as_double();
}

ExtendedReal a_weight(double t_end, const CosmologyParams& cosmo, const ExponentSet& e, QuadratureTolerance tol) {
  const double m2 = curved_mass_sq(t_end, cosmo);
  if (!(m2 > 0.0)) {
    throw PreconditionError("A(T) needs M(T) > 0; T = " + fmt(t_end) + " is at or past T1 = " +
                            horizon_times(cosmo).t1.to_string());
  }
  const ExtendedReal norm = quadrature_norm(t_end, cosmo, e, 2.0, true, tol);
  if (norm.is_infinite()) return norm;
  return ExtendedReal(std::pow(m2, -e.delta / 2.0) * norm.value());
}

RegimeConstants regime_constants(const CosmologyParams& cosmo, const ExponentSet& e, double D, double C, double C0) {
  if (!(D >= 0.0)) throw DomainError("D_mu0 must be >= 0");
  if (!(C > 0.0) || !(C0 > 0.0)) throw DomainError("C and C0 must be positive");
  RegimeConstants k;
  k.C = C;
  k.C0 = C0;
  k.D = D;
  const double c = cosmo.c;
  const double pm1 = e.p - 1.0;
  const double am = std::pow(cosmo.a0, e.mu0);
  if (pm1 == 0.0) {
    k.G = ExtendedReal(1.0 / (C * c));
  } else if (D == 0.0) {
    k.G = ExtendedReal::infinity();
  } else {
    k.G = ExtendedReal::from_double(std::pow(am / (C0 * D), pm1) / (C * c));
  }

  const double H = cosmo.hubble;
  if (H > 0.0 && e.qstar_finite()) {
    const double iq = e.inv_qstar;
    const double s1 = cosmo.n * (1.0 + cosmo.sigma);
    if (e.gamma && !same(*e.gamma, 1.0)) {
      k.B1 = std::pow(std::abs(4.0 / (s1 * (*e.gamma - 1.0))), iq) / (2.0 * H);
    }
    if (s1 > 0.0) k.B2 = std::pow(4.0 / s1, iq) / (2.0 * H);
    if (e.mu0 > 0.0 && pm1 > 0.0) k.B3 = std::pow(2.0 / (e.mu0 * pm1 * e.qstar()), iq) / (2.0 * H);
    if (k.B1 && pm1 > 0.0) {
      k.B0 = am / C0 * std::pow(std::pow(cosmo.mass, e.delta) / (C * c * *k.B1), 1.0 / pm1);
    }
  }
  return k;
}

// ---------------------------------------------------------------- master inequality

double bisection_cap(const CosmologyParams& cosmo) {
  return 1e6 / (std::abs(cosmo.hubble) * cosmo.n * (1.0 + std::abs(cosmo.sigma)) + 1.0);
}

bool master_holds(double t, const CosmologyParams& cosmo, const ExponentSet& e, const RegimeConstants& k,
                  BMethod method, double rel_slack) {
  if (t == 0.0) return true;
  const double m2 = curved_mass_sq(t, cosmo);
  if (!(m2 > 0.0) && e.delta != 0.0) return false;
  const double rhs_scale = e.delta == 0.0 ? 1.0 : std::pow(m2, e.delta / 2.0);
  if (k.G.is_infinite()) return true;
  const int fam = closed_form_family(cosmo, e);
  const BMethod use = (method == BMethod::closed_form && fam != 0) ? BMethod::closed_form : BMethod::quadrature;
  const ExtendedReal B = b_integral(t, cosmo, e, use).value;
  if (B.is_infinite()) return false;
  return B.value() <= k.G.value() * rhs_scale * (1.0 + rel_slack);
}

MasterSolve solve_master(const CosmologyParams& cosmo, const ExponentSet& e, const RegimeConstants& k) {
  const HorizonTimes h = horizon_times(cosmo);
  double hi = std::min(h.t1.as_double(), bisection_cap(cosmo));
  if (h.t0.is_finite()) hi = std::min(hi, h.t0.value() * (1.0 - 1e-12));
  MasterSolve out;
  out.upper = hi;
  const auto r = bisect_last_true([&](double t) { return master_holds(t, cosmo, e, k); }, 0.0, hi);
  out.t = r.x;
  out.saturated = r.saturated;
  out.iterations = r.iterations;
  return out;
}

std::vector<std::string> RegimeReport::matched_labels() const {
  std::vector<std::string> out;
  for (const auto& c : cases) {
    if (c.matched) out.push_back(c.label);
  }
  return out;
}

// ---------------------------------------------------------------- local cases

namespace {

struct Ctx {
  const CosmologyParams& cosmo;
  const ExponentSet& e;
  const RegimeConstants& k;
  HorizonTimes h;
  double H, s, m, mu0, p, n, c, a0, G, qs, k2;  // k2 = (nH/2c)^2
  bool qfin;
  double upper;  // implicit-condition search bound

  Ctx(const CosmologyParams& cp, const ExponentSet& ex, const RegimeConstants& kk)
      : cosmo(cp), e(ex), k(kk), h(horizon_times(cp)) {
    H = cp.hubble;
    s = cp.sigma;
    m = cp.mass;
    mu0 = ex.mu0;
    p = ex.p;
    n = cp.n;
    c = cp.c;
    a0 = cp.a0;
    G = kk.G.as_double();
    qfin = ex.qstar_finite();
    qs = qfin ? 1.0 / ex.inv_qstar : HUGE_VAL;
    k2 = cp.nh_over_2c() * cp.nh_over_2c();
    upper = std::min(h.t1.as_double(), bisection_cap(cp));
    if (h.t0.is_finite()) upper = std::min(upper, h.t0.value() * (1.0 - 1e-12));
  }
  double lam(double T) const { return 1.0 + n * (1.0 + s) * H * T / 2.0; }
  double pref() const { return 2.0 / (n * (1.0 + s) * H); }
  double am() const { return std::pow(a0, mu0); }
  // (a0^mu0/C0) X^{1/(p-1)}
  double d_bound(double X) const { return am() / k.C0 * std::pow(X, 1.0 / (p - 1.0)); }
};

CaseEvaluation explicit_case(std::string label, bool hyp, const std::string& why, double T) {
  CaseEvaluation ce;
  ce.label = std::move(label);
  ce.hypotheses_met = hyp;
  if (!hyp) {
    ce.detail = why;
    return ce;
  }
  if (std::isnan(T) || !(T > 0.0)) {
    ce.detail = "time bound not positive (" + fmt(T) + ")";
    return ce;
  }
  ce.matched = true;
  ce.t_bound = ExtendedReal::from_double(T);
  return ce;
}

CaseEvaluation implicit_case(std::string label, bool hyp, const std::string& why, const Ctx& x,
                             const std::function<bool(double)>& holds) {
  CaseEvaluation ce;
  ce.label = std::move(label);
  ce.hypotheses_met = hyp;
  if (!hyp) {
    ce.detail = why;
    return ce;
  }
  if (!holds(0.0)) {
    ce.detail = "condition fails already at T = 0";
    return ce;
  }
  const auto r = bisect_last_true(holds, 0.0, x.upper);
  if (!(r.x > 0.0)) {
    ce.detail = "no positive T satisfies the condition";
    return ce;
  }
  ce.matched = true;
  ce.t_bound = (r.saturated && x.upper == x.h.t1.as_double()) ? x.h.t1 : ExtendedReal(r.x);
  if (r.saturated) ce.detail = "condition holds on the whole search bracket";
  return ce;
}

std::vector<CaseEvaluation> local_cases(const Ctx& x) {
  std::vector<CaseEvaluation> out;
  const auto& e = x.e;
  const int p_vs_p1 = compare_p(x.p, e.p1);
  const double gam = e.gamma.value_or(NAN);
  const double B1 = x.k.B1.value_or(NAN);
  const double B2 = x.k.B2.value_or(NAN);
  const double B3 = x.k.B3.value_or(NAN);
  const double d = e.delta;
  const double qs = x.qs;
  const auto sing = [&](double T) { return x.s * x.k2 / (x.lam(T) * x.lam(T)); };
  const double slack = 1.0 + 1e-12;

  // i
  {
    const bool hyp = x.H == 0.0 && x.m > 0.0 && e.inv_qstar == 1.0;
    out.push_back(explicit_case("local.i", hyp, "needs H = 0, m > 0, q = inf", x.G * std::pow(x.m, d)));
  }
  // ii
  {
    const bool base = x.H > 0 && x.s >= 0 && x.mu0 > 0 && p_vs_p1 > 0 && x.m > 0 && x.qfin && x.k.B0;
    const bool hyp = base && x.k.D > *x.k.B0;
    double T = NAN;
    if (hyp) {
      // log-space: X^q' underflows and the trailing -1 cancels for steep exponents
      const double L = qs * (std::log(x.G / B1) + d * std::log(x.m));
      T = x.pref() * std::expm1(-std::log1p(-std::exp(L)) / (gam - 1.0));
    }
    out.push_back(explicit_case("local.ii", hyp,
                                base ? "D_mu0 <= B0 (small data: global branch)"
                                     : "needs H > 0, sigma >= 0, mu0 > 0, p > p1, m > 0, q* < inf",
                                T));
  }
  // iii
  {
    const bool hyp = x.H > 0 && x.s > 0 && x.mu0 > 0 && x.m == 0 && p_vs_p1 > 0 && x.qfin;
    out.push_back(implicit_case("local.iii", hyp, "needs H > 0, sigma > 0, mu0 > 0, m = 0, p > p1, q* < inf", x,
                                [&](double T) {
                                  const double lhs = 1.0 - std::pow(x.lam(T), 1.0 - gam);
                                  const double rhs = std::pow(x.G / B1 * std::pow(sing(T), d / 2.0), qs);
                                  return lhs <= rhs * slack;
                                }));
  }
  // iv, v
  {
    const auto t_iv = [&] {
      // log(1 + X^q') without overflowing X^q'
      const double L = qs * (std::log(x.G / B1) + d * std::log(x.m));
      const double log1p_xq = L > 0 ? L + std::log1p(std::exp(-L)) : std::log1p(std::exp(L));
      return x.pref() * std::expm1(log1p_xq / (1.0 - gam));
    };
    const bool hyp4 = x.H > 0 && x.s >= 0 && x.mu0 == 0 && x.m > 0 && x.qfin;
    out.push_back(explicit_case("local.iv", hyp4, "needs H > 0, sigma >= 0, mu0 = 0, m > 0, q* < inf",
                                hyp4 ? t_iv() : NAN));
    const bool hyp5 = x.H > 0 && x.s >= 0 && x.mu0 > 0 && x.m > 0 && x.qfin && p_vs_p1 < 0;
    out.push_back(explicit_case("local.v", hyp5, "needs H > 0, sigma >= 0, mu0 > 0, m > 0, q* < inf, p < p1",
                                hyp5 ? t_iv() : NAN));
  }
  // vi
  {
    const bool hyp = x.H > 0 && x.s > 0 && x.mu0 == 0 && x.m == 0 && x.qfin;
    out.push_back(implicit_case("local.vi", hyp, "needs H > 0, sigma > 0, mu0 = 0, m = 0, q* < inf", x,
                                [&](double T) {
                                  const double lhs = std::pow(x.lam(T), 1.0 - gam) - 1.0;
                                  const double rhs = std::pow(x.G / B1 * std::pow(sing(T), d / 2.0), qs);
                                  return lhs <= rhs * slack;
                                }));
  }
  // vii
  {
    const double thr = std::sqrt(std::abs(x.s)) * x.n * x.H / (2.0 * x.c);
    const bool hyp = x.H > 0 && x.s < -1 && x.mu0 > 0 && x.m > thr && x.qfin;
    out.push_back(implicit_case("local.vii", hyp, "needs H > 0, sigma < -1, mu0 > 0, m > sqrt|sigma| nH/2c, q* < inf",
                                x, [&](double T) {
                                  const double M2 = x.m * x.m + sing(T);
                                  if (!(M2 > 0.0)) return false;
                                  const double lhs = 1.0 - std::pow(x.lam(T), 1.0 - gam);
                                  const double rhs = std::pow(x.G / B1 * std::pow(M2, d / 2.0), qs);
                                  return lhs <= rhs * slack;
                                }));
  }
  // viii
  {
    const bool hyp = x.H > 0 && x.s >= 0 && x.mu0 > 0 && p_vs_p1 == 0 && x.m > 0 && x.qfin;
    double T = NAN;
    if (hyp) T = x.pref() * std::expm1(std::pow(x.G * std::pow(x.m, d) / B2, qs));
    out.push_back(explicit_case("local.viii", hyp, "needs H > 0, sigma >= 0, mu0 > 0, p = p1, m > 0, q* < inf", T));
  }
  // ix
  {
    const bool hyp = x.H > 0 && x.s > 0 && x.mu0 > 0 && p_vs_p1 == 0 && x.m == 0 && x.qfin;
    out.push_back(implicit_case("local.ix", hyp, "needs H > 0, sigma > 0, mu0 > 0, p = p1, m = 0, q* < inf", x,
                                [&](double T) {
                                  const double lhs = std::log(x.lam(T));
                                  const double rhs = std::pow(x.G / B2 * std::pow(sing(T), d / 2.0), qs);
                                  return lhs <= rhs * slack;
                                }));
  }
  const double ds_mass = x.m * x.m - x.k2;  // de Sitter inf M^2
  // x
  {
    const bool base = x.H > 0 && x.s == -1 && x.mu0 > 0 && x.p > 1 && ds_mass > 0 && x.qfin;
    const bool hyp = base && x.k.D > x.d_bound(std::pow(ds_mass, d / 2.0) / (x.k.C * x.c * B3));
    double T = NAN;
    if (hyp) {
      const double r = std::pow(x.G / B3 * std::pow(ds_mass, d / 2.0), qs);
      T = -std::log1p(-r) / (x.mu0 * (x.p - 1.0) * x.H * qs);
    }
    out.push_back(explicit_case("local.x", hyp,
                                base ? "D_mu0 below the de Sitter smallness bound (global branch)"
                                     : "needs H > 0, sigma = -1, mu0 > 0, p > 1, m > nH/2c, q* < inf",
                                T));
  }
  // xi
  {
    const bool hyp =
        x.H > 0 && x.s == -1 && ds_mass > 0 && x.qfin && (x.mu0 == 0 || x.p == 1.0);
    double T = NAN;
    if (hyp) T = std::pow(2.0 * x.H * x.G * std::pow(ds_mass, d / 2.0), qs) / (2.0 * x.H);
    out.push_back(explicit_case("local.xi", hyp,
                                "needs H > 0, sigma = -1, m > nH/2c, q* < inf and (mu0 = 0 or p = 1)", T));
  }
  // xii
  {
    const bool pr = compare_p(x.p, e.p2) >= 0 && (x.mu0 == 0 || p_vs_p1 < 0);
    const bool base = x.H > 0 && x.s >= 0 && !x.qfin && pr;
    const double M02 = x.m * x.m + x.s * x.k2;
    const bool hyp = base && M02 > 0 && x.k.D < x.d_bound(x.H / (x.k.C * x.c) * std::pow(M02, d / 2.0));
    out.push_back(implicit_case("local.xii", hyp,
                                base ? "D_mu0 above the sup-norm smallness bound"
                                     : "needs H > 0, sigma >= 0, q* = inf, p2 <= p < (p1 if mu0 > 0)",
                                x, [&](double T) {
                                  const double lhs = std::pow(x.lam(T), *e.zeta);
                                  const double M2 = x.m * x.m + sing(T);
                                  const double rhs = 2.0 * x.H * x.G * std::pow(M2, d / 2.0);
                                  return lhs <= rhs * slack;
                                }));
  }
  // xiii
  {
    const double thr = std::sqrt(std::abs(x.s)) * x.n * x.H / (2.0 * x.c);
    const bool base = x.H > 0 && x.s < -1 && compare_p(x.p, e.p2) >= 0 && x.m > thr && !x.qfin;
    CaseEvaluation ce;
    ce.label = "local.xiii";
    if (!base) {
      ce.detail = "needs H > 0, sigma < -1, p >= p2, m > sqrt|sigma| nH/2c, q* = inf";
    } else if (compare_p(x.p, e.p_mu0) == 0) {
      ce.hypotheses_met = x.k.D <= x.d_bound(x.H / (x.k.C * x.c));
      if (ce.hypotheses_met) {
        ce.matched = true;
        ce.t_bound = x.h.t1;
        ce.detail = "open interval: any T < T1";
      } else {
        ce.detail = "D_mu0 above (a0^mu0/C0)(H/Cc)^{1/(p-1)}";
      }
    } else {
      const double M02 = x.m * x.m + x.s * x.k2;
      const double X = std::pow(2.0 * x.H * x.G, -2.0 / d);
      ce.hypotheses_met = M02 > 0 && x.k.D < x.d_bound(x.H / (x.k.C * x.c) * std::pow(M02, d / 2.0)) &&
                          x.m * x.m - X > std::abs(x.s) * x.k2;
      if (ce.hypotheses_met) {
        const double T = -x.pref() * (1.0 - std::sqrt(x.k2) * std::sqrt(std::abs(x.s) / (x.m * x.m - X)));
        ce = explicit_case("local.xiii", true, "", T);
      } else {
        ce.detail = "D_mu0 above the sup-norm smallness bound";
      }
    }
    out.push_back(ce);
  }
  for (auto& ce : out) {
    if (ce.matched && x.h.t1 < ce.t_bound) ce.t_bound = x.h.t1;
  }
  return out;
}

void check_theory_hypotheses(const RegimeQuery& q) {
  q.nl.validate();
  std::vector<std::string> bad;
  if (!(q.orders.mu < q.nl.p) && !q.nl.is_polynomial()) {
    bad.push_back("mu < p unless f is polynomial (got mu = " + fmt(q.orders.mu) + ", p = " + fmt(q.nl.p) + ")");
  }
  if (q.cosmo.hubble < 0.0) bad.push_back("adot >= 0 (H >= 0)");
  if (q.cosmo.hubble > 0.0 && q.cosmo.sigma > -1.0 && q.cosmo.sigma < 0.0) {
    bad.push_back("Mdot <= 0 (fails for H > 0 and -1 < sigma < 0)");
  }
  if (!(curved_mass_sq(0.0, q.cosmo) > 0.0)) bad.push_back("M(0) > 0");
  if (!bad.empty()) throw HypothesisError(bad);
}

}  // namespace

RegimeReport classify_local(const RegimeQuery& q) {
  check_theory_hypotheses(q);
  RegimeReport r;
  r.kind = "local";
  r.exponents = exponent_set(q.cosmo, q.orders, q.nl.p, q.inv_q);
  r.constants = regime_constants(q.cosmo, *r.exponents, q.D, q.C, q.C0);
  r.horizons = horizon_times(q.cosmo, q.nl.p);
  const Ctx x(q.cosmo, *r.exponents, *r.constants);
  r.cases = local_cases(x);
  r.master = solve_master(q.cosmo, *r.exponents, *r.constants);

  // Case formulas that land within rounding of T1 evaluate M(T)^2 under heavy
  // cancellation; back off by at most 1e-9 relative until the inequality holds.
  for (auto& c : r.cases) {
    if (!c.matched || c.t_bound.is_infinite()) continue;
    const double T = c.t_bound.value();
    if (T == 0.0 || master_holds(T, q.cosmo, *r.exponents, *r.constants)) continue;
    bool fixed = false;
    for (double rel = 1e-15; rel <= 1e-9; rel *= 10.0) {
      const double Tb = T * (1.0 - rel);
      if (master_holds(Tb, q.cosmo, *r.exponents, *r.constants)) {
        c.t_bound = ExtendedReal(Tb);
        c.detail += (c.detail.empty() ? "" : "; ") + std::string("T backed off by ") + fmt(rel) + " relative";
        fixed = true;
        break;
      }
    }
    if (!fixed) r.notes.push_back(c.label + ": master inequality fails at the case time " + fmt(T));
  }

  const CaseEvaluation* best = nullptr;
  for (const auto& c : r.cases) {
    if (c.matched && (!best || best->t_bound < c.t_bound)) best = &c;
  }
  if (best) {
    r.matched_case = best->label;
    r.admissible_t = best->t_bound;
    r.certified = true;
  } else {
    r.admissible_t = r.master->saturated && r.master->upper == r.horizons.t1.as_double()
                         ? r.horizons.t1
                         : ExtendedReal(r.master->t);
    r.notes.push_back("no closed case matched; reporting the bisection time only");
  }
  if (r.admissible_t.is_finite() && !(r.admissible_t.value() <= r.master->t * (1.0 + 1e-9) + 1e-6) &&
      !r.master->saturated) {
    r.notes.push_back("case time exceeds the bisection time: " + r.admissible_t.to_string() + " > " +
                      fmt(r.master->t));
  }
  return r;
}

RegimeReport classify_global(const RegimeQuery& q) {
  check_theory_hypotheses(q);
  RegimeReport r;
  r.kind = "global";
  r.exponents = exponent_set(q.cosmo, q.orders, q.nl.p, q.inv_q);
  r.constants = regime_constants(q.cosmo, *r.exponents, q.D, q.C, q.C0);
  r.horizons = horizon_times(q.cosmo, q.nl.p);
  const Ctx x(q.cosmo, *r.exponents, *r.constants);
  const auto& e = *r.exponents;
  const auto& k = *r.constants;
  const int p_vs_p1 = compare_p(x.p, e.p1);
  const double ds_mass = x.m * x.m - x.k2;
  const bool small_ok = r.horizons.t1 == r.horizons.t0;

  auto push = [&](std::string label, bool base, const std::string& why, double bound) {
    CaseEvaluation ce;
    ce.label = std::move(label);
    ce.hypotheses_met = base;
    if (!base) {
      ce.detail = why;
    } else if (!small_ok) {
      ce.detail = "T1 < T0";
    } else if (k.D <= bound) {
      ce.matched = true;
      ce.t_bound = r.horizons.t0;
      ce.detail = "D_mu0 <= " + fmt(bound);
    } else {
      ce.detail = "D_mu0 = " + fmt(k.D) + " > " + fmt(bound);
    }
    r.cases.push_back(ce);
  };
  {
    const bool base = x.H > 0 && x.s >= 0 && x.mu0 > 0 && p_vs_p1 > 0 && x.m > 0 && x.qfin && k.B0;
    push("small_global.i", base, "needs H > 0, sigma >= 0, mu0 > 0, p > p1, m > 0, q* < inf",
         base ? *k.B0 : NAN);
  }
  {
    const bool base = x.H > 0 && x.s == -1 && x.mu0 > 0 && x.p > 1 && ds_mass > 0 && x.qfin;
    push("small_global.ii", base, "needs H > 0, sigma = -1, mu0 > 0, p > 1, m > nH/2c, q* < inf",
         base ? x.d_bound(std::pow(ds_mass, e.delta / 2.0) / (k.C * x.c * *k.B3)) : NAN);
  }
  {
    const bool base = x.H > 0 && x.s >= 0 && x.mu0 > 0 && p_vs_p1 >= 0 && compare_p(x.p, e.p2) >= 0 && !x.qfin;
    push("small_global.iii", base, "needs H > 0, sigma >= 0, mu0 > 0, p >= max{p1, p2}, q* = inf",
         base ? x.d_bound(x.H * std::pow(x.m, e.delta) / (k.C * x.c)) : NAN);
  }
  {
    const bool base = x.H > 0 && x.s == -1 && compare_p(x.p, e.p2) >= 0 && !x.qfin && ds_mass > 0;
    push("small_global.iv", base, "needs H > 0, sigma = -1, p >= p2, q* = inf, m > nH/2c",
         base ? x.d_bound(x.H / (k.C * x.c) * std::pow(ds_mass, e.delta / 2.0)) : NAN);
  }
  {
    CaseEvaluation ce;
    ce.label = "large_global";
    const bool lam_ok = q.nl.real_lambda() && q.nl.lambda.real() >= 0.0;
    const double M02 = x.m * x.m + x.s * x.k2;
    ce.hypotheses_met =
        x.H >= 0 && x.mu0 == 0 && lam_ok && q.nl.form == NonlinearForm::gauge_invariant && M02 > 0;
    if (!ce.hypotheses_met) {
      ce.detail = "needs H >= 0, mu0 = 0, real lambda >= 0, gauge-invariant f, m^2 + sigma (nH/2c)^2 > 0";
    } else if (x.H == 0 || x.s >= -1) {
      ce.matched = true;
      ce.t_bound = r.horizons.t0;
    } else {
      ce.detail = "H > 0 and sigma < -1: existence only on [0, T1)";
    }
    r.cases.push_back(ce);
  }

  // sup A over (0, T0): A is nondecreasing, so follow a geometric sequence.
  if (x.H > 0 && k.G.is_finite() && small_ok) {
    double prev = -1.0;
    double t = 1.0 / x.H;
    const double t_end = std::min(r.horizons.t0.as_double() * (1.0 - 1e-9), bisection_cap(q.cosmo));
    bool conv = false;
    for (int i = 0; i < 80 && t <= t_end; ++i, t *= 2.0) {
      const double m2 = curved_mass_sq(t, q.cosmo);
      if (!(m2 > 0.0)) break;
      const int fam = closed_form_family(q.cosmo, e);
      const BValue B = b_integral(t, q.cosmo, e, fam ? BMethod::closed_form : BMethod::quadrature);
      const double A = std::pow(x.a0, -x.mu0 * (x.p - 1.0)) * std::pow(m2, -e.delta / 2.0) * B.value.as_double();
      if (prev > 0.0 && std::abs(A - prev) <= 1e-10 * A) {
        conv = true;
        prev = A;
        break;
      }
      prev = A;
    }
    r.sup_a = prev;
    if (!conv) r.notes.push_back("sup A(t) did not settle before the search cap");
    const double lhs = k.C * x.c * std::pow(k.C0 * k.D, x.p - 1.0) * prev;
    r.notes.push_back("C c (C0 D)^{p-1} sup A = " + fmt(lhs));
  }

  for (const auto& c : r.cases) {
    if (c.matched) {
      r.matched_case = c.label;
      r.admissible_t = c.t_bound;
      r.certified = true;
      break;
    }
  }
  if (!r.certified) {
    r.admissible_t = ExtendedReal(0.0);
    r.notes.push_back("no global case matched");
  }
  return r;
}

// ---------------------------------------------------------------- blow-up

InitialFunctionals make_functionals(double u1_sq, double grad_u0_sq, double u0_sq, double u0_lp1, double overlap,
                                    const CosmologyParams& cosmo, const Nonlinearity& nl) {
  InitialFunctionals f;
  f.u1_sq = u1_sq;
  f.grad_u0_sq = grad_u0_sq;
  f.u0_sq = u0_sq;
  f.u0_lp1 = u0_lp1;
  f.overlap = overlap;
  const double c = cosmo.c;
  const double a0 = cosmo.a0;
  const double M02 = curved_mass_sq(0.0, cosmo);
  f.energy = u1_sq / (c * c) + grad_u0_sq / (a0 * a0) + M02 * u0_sq +
             2.0 * nl.lambda.real() * u0_lp1 / (std::pow(a0, nl.scaling_exponent(cosmo.n)) * (nl.p + 1.0));
  const double a1 = a0 * cosmo.hubble;
  f.positivity = a1 * u0_sq + a0 * overlap;
  if (f.positivity > 0.0 && nl.kappa_star > 0.0) f.t_star = a0 * u0_sq / (2.0 * nl.kappa_star * f.positivity);
  return f;
}

RegimeReport classify_blowup(const CosmologyParams& cosmo, const Nonlinearity& nl, const InitialFunctionals& f,
                             int samples) {
  cosmo.validate();
  nl.validate();
  RegimeReport r;
  r.kind = "blowup";
  r.horizons = horizon_times(cosmo, nl.p);
  BlowupSummary b;
  b.horizons = r.horizons;
  b.t_star = f.t_star;
  const double H = cosmo.hubble;
  const double n = cosmo.n;
  const double s = cosmo.sigma;
  const double m = cosmo.mass;
  const double c = cosmo.c;
  const double p = nl.p;
  const auto add = [&](std::string name, bool ok, double v) { b.checks.push_back({std::move(name), ok, v}); };

  add("adot <= 0", H <= 0.0, H);
  add(H != 0.0 ? "p >= 1 + 4/n" : "p > 1", H != 0.0 ? p >= 1.0 + 4.0 / n : p > 1.0, p);
  add("lambda < 0 (real)", nl.real_lambda() && nl.lambda.real() < 0.0, nl.lambda.real());
  add("gauge-invariant f", nl.form == NonlinearForm::gauge_invariant, 0.0);
  add("2 < kappa <= p + 1", nl.kappa > 2.0 && nl.kappa <= p + 1.0, nl.kappa);
  add("0 < kappa_* < (kappa - 2)/4", nl.kappa_star > 0.0 && nl.kappa_star < (nl.kappa - 2.0) / 4.0, nl.kappa_star);
  add("negative initial energy", f.energy < 0.0, f.energy);
  add("a1 ||u0||^2 + a0 Re<u0,u1> > 0", f.positivity > 0.0, f.positivity);
  const double ts = f.t_star.value_or(HUGE_VAL);
  add("T_* <= T1", f.t_star && ExtendedReal(ts) <= r.horizons.t1, ts);

  // Pointwise conditions on [0, T_*).
  bool mass_ok = true;
  bool mdot_ok = true;
  bool conv_ok = true;
  double worst = HUGE_VAL;
  if (f.t_star && ts < r.horizons.t0.as_double()) {
    for (int i = 0; i < samples; ++i) {
      const double t = ts * i / samples;
      const auto d = scale_derivatives(t, cosmo);
      const double M2 = curved_mass_sq(t, cosmo);
      const double scale = std::max({1.0, c * c * std::abs(M2), d.rate * d.rate, std::abs(d.rate_dot)});
      if (M2 < -1e-12 * scale) mass_ok = false;
      if (mass_mass_dot(t, cosmo) > 1e-14 * scale) mdot_ok = false;
      const double cond = (nl.kappa - 2.0) * (c * c * std::max(M2, 0.0) + d.rate * d.rate) + 2.0 * d.rate_dot;
      worst = std::min(worst, cond / scale);
      if (cond < -1e-12 * scale) conv_ok = false;
    }
  } else {
    mass_ok = mdot_ok = conv_ok = false;
  }
  add("M^2 >= 0 on [0, T_*)", mass_ok, 0.0);
  add("Mdot <= 0 on [0, T_*)", mdot_ok, 0.0);
  add("(kappa-2){c^2 M^2 + (adot/a)^2} + 2 d/dt(adot/a) >= 0 on [0, T_*)", conv_ok, worst);
  b.direct_ok = std::all_of(b.checks.begin(), b.checks.end(), [](const NamedCheck& ch) { return ch.passed; });

  // Closed case table with kappa = p + 1.
  const bool base = H <= 0.0 && (H != 0.0 ? p >= 1.0 + 4.0 / n : p > 1.0) && nl.real_lambda() &&
                    nl.lambda.real() < 0.0 && nl.form == NonlinearForm::gauge_invariant &&
                    std::abs(nl.kappa - (p + 1.0)) <= 1e-12 && nl.kappa_star > 0.0 &&
                    nl.kappa_star < (nl.kappa - 2.0) / 4.0 && f.energy < 0.0 && f.positivity > 0.0 && f.t_star &&
                    ExtendedReal(ts) <= r.horizons.t1;
  const double thr = std::sqrt(std::abs(s)) * n * std::abs(H) / (2.0 * c);
  const double pstar = std::abs(4.0 + s * n * n) > 0.0 ? 1.0 + 4.0 * n * (1.0 + s) / (4.0 + s * n * n) : NAN;
  const double psharp =
      H != 0.0 ? 1.0 + 4.0 * n * (1.0 + s) / (4.0 + s * n * n + std::pow(2.0 * m * c / H, 2.0)) : NAN;
  const ExtendedReal t2 = r.horizons.t2_defined() ? r.horizons.t2_value() : ExtendedReal(-1.0);
  const bool t2_ok = r.horizons.t2_defined() && ExtendedReal(ts) <= t2;
  const bool t12_ok = ExtendedReal(ts) <= r.horizons.t1 && t2_ok;
  const double lo4 = std::max(-1.0, -4.0 / (n * n));
  const double lo6 = H != 0.0 ? std::max(-1.0, -4.0 / (n * n) * (1.0 + std::pow(m * c / H, 2.0))) : -1.0;

  const auto bcase = [&](std::string label, bool hyp, const std::string& why) {
    CaseEvaluation ce;
    ce.label = std::move(label);
    ce.hypotheses_met = hyp;
    ce.matched = hyp && base;
    if (ce.matched) ce.t_bound = ExtendedReal(ts);
    ce.detail = !hyp ? why : (base ? "" : "shared hypotheses on p, lambda, kappa or the data fail");
    r.cases.push_back(ce);
  };
  bcase("blowup.i", H == 0.0, "needs H = 0");
  bcase("blowup.ii", H < 0 && s == -1 && m >= n * std::abs(H) / (2.0 * c), "needs H < 0, sigma = -1, m >= n|H|/2c");
  bcase("blowup.iii", H < 0 && s == 0 && p >= pstar && ExtendedReal(ts) <= r.horizons.t0,
        "needs H < 0, sigma = 0, p >= p_*, T_* <= T0");
  bcase("blowup.iv", H < 0 && s == 0 && p > psharp && p < pstar && t2_ok,
        "needs H < 0, sigma = 0, p_# < p < p_*, T_* <= T2");
  bcase("blowup.v", H < 0 && s > lo4 && s < 0 && p >= pstar && m > thr && ExtendedReal(ts) <= r.horizons.t1,
        "needs H < 0, max{-1,-4/n^2} < sigma < 0, p >= p_*, m > sqrt|sigma| n|H|/2c, T_* <= T1");
  bcase("blowup.vi", H < 0 && s > lo6 && s <= -4.0 / (n * n) && p > psharp && m > thr && t12_ok,
        "needs H < 0, sigma in the heavy-mass window, p > p_#, m > sqrt|sigma| n|H|/2c, T_* <= min{T1, T2}");
  bcase("blowup.vii", H < 0 && s > lo4 && s < 0 && p > psharp && p < pstar && m > thr && t12_ok,
        "needs H < 0, max{-1,-4/n^2} < sigma < 0, p_# < p < p_*, m > sqrt|sigma| n|H|/2c, T_* <= min{T1, T2}");

  for (const auto& ce : r.cases) {
    if (ce.matched) {
      r.matched_case = ce.label;
      break;
    }
  }
  r.certified = r.matched_case != "none" && b.direct_ok;
  if (r.matched_case != "none" && !b.direct_ok) r.notes.push_back("case matched but the direct hypothesis check failed");
  if (r.certified) r.admissible_t = ExtendedReal(ts);
  r.blowup = b;
  return r;
}

}  // namespace flrw
