#include "flrw/background.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>

#include "flrw/errors.hpp"

namespace flrw {

struct Background::Table {
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
  double t_end;
};

Background::Background(const CosmologyParams& p) : params_(p) { params_.validate(); }

Background Background::tabulated(int n, double c, double mass, double dt, std::vector<double> a_samples) {
  if (a_samples.size() < 4) throw PreconditionError("tabulated background needs at least 4 samples");
  if (!(dt > 0.0)) throw PreconditionError("tabulated background needs dt > 0");
  for (double v : a_samples) {
    if (!(v > 0.0)) throw PreconditionError("tabulated scale factor must stay positive");
  }
  CosmologyParams p;
  p.n = n;
  p.c = c;
  p.mass = mass;
  p.a0 = a_samples.front();
  Background bg(p);
  const double t_end = dt * static_cast<double>(a_samples.size() - 1);
  bg.table_ = std::make_shared<const Table>(
      Table{boost::math::interpolators::cardinal_cubic_b_spline<double>(a_samples.begin(), a_samples.end(), 0.0, dt),
            t_end});
  bg.params_.hubble = bg.scale(0.0).rate;
  return bg;
}

double Background::life_span() const { return table_ ? table_->t_end : params_.life_span(); }

double Background::mass_horizon() const {
  if (table_) return table_->t_end;
  return horizon_times(params_).t1.as_double();
}

ScaleDerivatives Background::scale(double t) const {
  if (!table_) return scale_derivatives(t, params_);
  if (t < 0.0 || t > table_->t_end) throw DomainError("time outside the tabulated background");
  ScaleDerivatives d;
  d.a = table_->spline(t);
  d.a_dot = table_->spline.prime(t);
  d.a_ddot = table_->spline.double_prime(t);
  d.rate = d.a_dot / d.a;
  d.rate_dot = d.a_ddot / d.a - d.rate * d.rate;
  return d;
}

double Background::mass_sq(double t) const {
  if (!table_) return curved_mass_sq(t, params_);
  const auto d = scale(t);
  const double n = params_.n;
  const double c2 = params_.c * params_.c;
  return params_.mass * params_.mass - n * (n - 2.0) / (4.0 * c2) * d.rate * d.rate - n / (2.0 * c2) * d.a_ddot / d.a;
}

double Background::mass_mass_dot(double t) const {
  if (!table_) return flrw::mass_mass_dot(t, params_);
  // Central difference of M^2 / 2; the tabulated path is not used for validated runs.
  const double h = 1e-5 * std::max(1.0, table_->t_end);
  const double lo = std::max(0.0, t - h);
  const double hi = std::min(table_->t_end, t + h);
  return 0.5 * (mass_sq(hi) - mass_sq(lo)) / (hi - lo);
}

}  // namespace flrw
