#include "flrw/cosmology.hpp"

#include <algorithm>
#include <cmath>

#include "flrw/errors.hpp"

namespace flrw {

namespace {

int sgn(double x) { return (x > 0) - (x < 0); }

void check_time(double t, const CosmologyParams& p) {
  if (!(t >= 0.0)) throw DomainError("time must be >= 0, got " + format_double(t));
  const double t0 = p.life_span();
  if (!(t < t0)) {
    throw DomainError("time " + format_double(t) + " outside the life span [0, T0=" + format_double(t0) + ")");
  }
}

}  // namespace

void CosmologyParams::validate() const {
  std::vector<std::string> bad;
  if (n < 1) bad.push_back("n >= 1 (got " + std::to_string(n) + ")");
  if (!std::isfinite(hubble)) bad.push_back("H finite");
  if (!std::isfinite(sigma)) bad.push_back("sigma finite");
  if (!(c > 0.0) || !std::isfinite(c)) bad.push_back("c > 0 (got " + format_double(c) + ")");
  if (!(mass >= 0.0) || !std::isfinite(mass)) bad.push_back("m >= 0 (got " + format_double(mass) + ")");
  if (!(a0 > 0.0) || !std::isfinite(a0)) bad.push_back("a0 > 0 (got " + format_double(a0) + ")");
  if (!bad.empty()) throw HypothesisError(std::move(bad));
}

double CosmologyParams::base(double t) const {
  if (is_de_sitter()) return 1.0;
  return 1.0 + n * (1.0 + sigma) * hubble * t / 2.0;
}

double CosmologyParams::life_span() const {
  const double s = (1.0 + sigma) * hubble;
  if (s >= 0.0) return HUGE_VAL;
  return -2.0 / (n * s);
}

double scale_factor(double t, const CosmologyParams& p) {
  check_time(t, p);
  if (p.is_de_sitter()) return p.a0 * std::exp(p.hubble * t);
  return p.a0 * std::pow(p.base(t), 2.0 / (p.n * (1.0 + p.sigma)));
}

ScaleDerivatives scale_derivatives(double t, const CosmologyParams& p) {
  ScaleDerivatives d;
  d.a = scale_factor(t, p);
  const double r = d.a / p.a0;
  const double e = p.n * (1.0 + p.sigma);
  const double h = p.hubble;
  d.rate = h * std::pow(r, -e / 2.0);
  d.a_dot = d.a * d.rate;
  d.a_ddot = d.a * h * h * std::pow(r, -e) * (1.0 - e / 2.0);
  d.rate_dot = -e * h * h / 2.0 * std::pow(r, -e);
  return d;
}

double curved_mass_sq(double t, const CosmologyParams& p) {
  check_time(t, p);
  const double k = p.nh_over_2c();
  const double b = p.base(t);
  return p.mass * p.mass + p.sigma * k * k / (b * b);
}

double mass_mass_dot(double t, const CosmologyParams& p) {
  check_time(t, p);
  const double k = p.nh_over_2c();
  const double b = p.base(t);
  return -p.c * p.sigma * (1.0 + p.sigma) * k * k * k / (b * b * b);
}

double CurvedMass::real() const {
  if (!is_real()) throw DomainError("M is imaginary here (M^2 = " + format_double(squared_) + ")");
  return std::sqrt(squared_);
}

double CurvedMass::imaginary_magnitude() const {
  if (is_real()) throw DomainError("M is real here (M^2 = " + format_double(squared_) + ")");
  return std::sqrt(-squared_);
}

CurvedMass curved_mass(double t, const CosmologyParams& p) { return CurvedMass(curved_mass_sq(t, p)); }

const ExtendedReal& HorizonTimes::t2_value() const {
  if (const auto* v = std::get_if<ExtendedReal>(&t2)) return *v;
  throw PreconditionError("T2 undefined: " + std::get<UndefinedTime>(t2).reason);
}

HorizonTimes horizon_times(const CosmologyParams& p, std::optional<double> power) {
  p.validate();
  HorizonTimes h;
  const double s = (1.0 + p.sigma) * p.hubble;
  h.t0 = ExtendedReal::from_double(p.life_span());
  if (s >= 0.0) {
    h.t1 = ExtendedReal::infinity();
  } else {
    const double threshold = std::sqrt(std::abs(p.sigma)) * p.n * std::abs(p.hubble) / (2.0 * p.c);
    if (p.sigma < 0.0 && p.mass > threshold) {
      h.t1 = ExtendedReal(h.t0.value() * (1.0 - threshold / p.mass));
    } else {
      h.t1 = h.t0;
    }
  }

  if (s == 0.0) {
    h.t2 = ExtendedReal::infinity();
  } else if (!power) {
    h.t2 = UndefinedTime{"T2 depends on the nonlinear power p", 0.0};
  } else if (*power <= 1.0) {
    h.t2 = UndefinedTime{"T2 needs p > 1", *power};
  } else if (p.mass <= 0.0) {
    h.t2 = UndefinedTime{"T2 needs m > 0", p.mass};
  } else {
    const double pm1 = *power - 1.0;
    const double n = p.n;
    const double rad = (n * (1.0 + p.sigma) - pm1 * (p.sigma * n * n / 4.0 + 1.0)) / pm1;
    if (rad < 0.0) {
      h.t2 = UndefinedTime{"negative radicand {n(1+sigma) - (p-1)(sigma n^2/4 + 1)}/(p-1)", rad};
    } else {
      const double t0 = -2.0 / (n * s);
      h.t2 = ExtendedReal::from_double(t0 * (1.0 + p.hubble / (p.mass * p.c) * std::sqrt(rad)));
    }
  }
  return h;
}

MassSignReport mass_sign_profile(const CosmologyParams& p, int samples, double horizon_cap) {
  if (samples < 2) throw PreconditionError("mass_sign_profile needs at least 2 samples");
  const HorizonTimes h = horizon_times(p);
  MassSignReport r;
  r.window_end = std::min(h.t1.as_double(), horizon_cap);
  r.predicted_sign = -sgn(p.sigma) * sgn(1.0 + p.sigma) * sgn(p.hubble);
  if (p.hubble >= 0.0) {
    r.nonincreasing = p.hubble == 0.0 || p.sigma >= 0.0 || p.sigma <= -1.0;
  }

  for (int i = 0; i < samples; ++i) {
    const double t = r.window_end * i / samples;
    const double m2 = curved_mass_sq(t, p);
    const double mmd = mass_mass_dot(t, p);
    r.t.push_back(t);
    r.mass_sq.push_back(m2);
    r.mass_mass_dot.push_back(mmd);
    if (sgn(mmd) != r.predicted_sign) r.violations.push_back({t, "sign of M Mdot", mmd});
    if (r.nonincreasing && *r.nonincreasing && mmd > 0.0) {
      r.violations.push_back({t, "M Mdot <= 0 expected", mmd});
    }
    if (r.nonincreasing && !*r.nonincreasing && !(mmd > 0.0)) {
      r.violations.push_back({t, "M Mdot > 0 expected", mmd});
    }
  }

  // Decelerating Big Rip branch with a heavy field: M^2 stays positive and hits 0 at T1.
  const double threshold = std::sqrt(std::abs(p.sigma)) * p.n * std::abs(p.hubble) / (2.0 * p.c);
  if ((1.0 + p.sigma) * p.hubble < 0.0 && p.sigma < 0.0 && p.mass > threshold) {
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      if (!(r.mass_sq[i] > 0.0)) r.violations.push_back({r.t[i], "M^2 > 0 before T1", r.mass_sq[i]});
    }
    const double at_t1 = curved_mass_sq(h.t1.value(), p);
    if (std::abs(at_t1) > 1e-10 * std::max(1.0, p.mass * p.mass)) {
      r.violations.push_back({h.t1.value(), "M^2(T1) = 0", at_t1});
    }
  }
  return r;
}

}  // namespace flrw
