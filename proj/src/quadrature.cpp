#include "flrw/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw {

double integrate(const std::function<double(double)>& f, double a, double b, QuadratureTolerance tol) {
  if (b < a) return -integrate(f, b, a, tol);
  if (b == a) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

  double err_total = 0.0;
  double l1_total = 0.0;
  const double total = GK::integrate(f, a, b, 15, tol.rel * 0.1, &err_total, &l1_total);
  if (!std::isfinite(total)) throw NumericalError("quadrature produced a non-finite value");
  if (err_total > std::max(tol.abs, tol.rel * l1_total)) {
    throw NumericalError("quadrature did not reach tolerance (error estimate " + format_double(err_total) + ", scale " + format_double(l1_total) + ")");
  }
  return total;
}

double lq_norm(const std::function<double(double)>& f, double t_end, double inv_q, QuadratureTolerance tol,
               double time_scale) {
  if (!(t_end >= 0.0)) throw DomainError("lq_norm needs T >= 0");
  if (t_end == 0.0) return 0.0;
  if (inv_q == 0.0) {
    constexpr int kSamples = 4096;
    double s = 0.0;
    for (int i = 0; i <= kSamples; ++i) s = std::max(s, std::abs(f(t_end * i / kSamples)));
    return s;
  }
  const double q = 1.0 / inv_q;
  // Normalise by the endpoint scale so |f|^q does not overflow for large q.
  double ref = std::max(std::abs(f(0.0)), std::abs(f(t_end)));
  if (!(ref > 0.0) || !std::isfinite(ref)) ref = 1.0;
  const auto g = [&](double t) { return std::pow(std::abs(f(t)) / ref, q); };
  double v;
  if (time_scale > 0.0 && t_end > time_scale) {
    const double s = time_scale;
    v = integrate(
        [&](double x) {
          const double t = std::min(s * std::expm1(x), t_end);
          return g(t) * s * std::exp(x);
        },
        0.0, std::log1p(t_end / s), tol);
  } else {
    v = integrate(g, 0.0, t_end, tol);
  }
  return ref * std::pow(v, inv_q);
}

std::vector<double> cumulative_integral(std::span<const double> t, std::span<const double> f, TimeRule rule) {
  if (t.size() != f.size()) throw PreconditionError("cumulative_integral: size mismatch");
  const std::size_t n = t.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;

  bool uniform = true;
  const double h = t[1] - t[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::abs(h)) {
      uniform = false;
      break;
    }
  }
  if (rule == TimeRule::trapezoid || !uniform || n < 3) {
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
    return out;
  }
  // Composite Simpson at even nodes; odd nodes add one interval with the
  // three-point formula so every node is fourth order.
  for (std::size_t i = 2; i < n; i += 2) out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
  for (std::size_t i = 1; i < n; i += 2) {
    if (i + 1 < n) {
      out[i] = out[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
    } else {
      out[i] = out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
    }
  }
  return out;
}

BisectionResult bisect_last_true(const std::function<bool(double)>& ok, double lo, double hi, int max_iter,
                                 double rel_tol) {
  BisectionResult r;
  if (!ok(lo)) throw PreconditionError("bisection: predicate false at the lower end");
  if (ok(hi)) {
    r.x = hi;
    r.saturated = true;
    return r;
  }
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(hi))) break;
  }
  r.x = lo;
  return r;
}

}  // namespace flrw
