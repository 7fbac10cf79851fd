#pragma once

#include <functional>
#include <span>
#include <vector>

namespace flrw {

struct QuadratureTolerance {
  double abs = 1e-10;
  double rel = 1e-10;
};

// Adaptive Gauss-Kronrod on [a, b]; throws NumericalError when the error
// estimate misses max(abs, rel * int |f|).
double integrate(const std::function<double(double)>& f, double a, double b, QuadratureTolerance tol = {});

// ||f||_{L^q(0, T)} given 1/q. inv_q == 0 gives the sup norm, taken over a
// dense sample of [0, T] (exact for monotone integrands, which is all we use).
// time_scale > 0 integrates in x = log(1 + t / time_scale) when T exceeds it.
double lq_norm(const std::function<double(double)>& f, double t_end, double inv_q, QuadratureTolerance tol = {},
               double time_scale = 0.0);

enum class TimeRule { trapezoid, simpson };

// Running integral F(t_i) = int_{t_0}^{t_i} f. Simpson needs uniform spacing;
// nonuniform grids fall back to the trapezoid rule.
std::vector<double> cumulative_integral(std::span<const double> t, std::span<const double> f, TimeRule rule);

// Largest x in [lo, hi] with ok(x) true, for a predicate that is true on a
// prefix of the interval. ok(lo) must hold.
struct BisectionResult {
  double x = 0.0;
  bool saturated = false;  // predicate still true at hi
  int iterations = 0;
};
BisectionResult bisect_last_true(const std::function<bool(double)>& ok, double lo, double hi, int max_iter = 200,
                                 double rel_tol = 1e-14);

}  // namespace flrw
