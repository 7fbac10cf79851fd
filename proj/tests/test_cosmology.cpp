#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flrw/background.hpp"
#include "flrw/cosmology.hpp"
#include "flrw/errors.hpp"

using namespace flrw;

namespace {

CosmologyParams make(int n, double H, double sigma, double c, double m, double a0 = 1.0) {
  CosmologyParams p;
  p.n = n;
  p.hubble = H;
  p.sigma = sigma;
  p.c = c;
  p.mass = m;
  p.a0 = a0;
  return p;
}

// Richardson-extrapolated central difference.
template <class F>
double fd(F f, double t, double h) {
  const double d1 = (f(t + h) - f(t - h)) / (2 * h);
  const double d2 = (f(t + h / 2) - f(t - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("scale factor reference values") {
  CHECK(scale_factor(5.0, make(1, 0.0, 3.7, 1, 1, 2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(scale_factor(0.5, make(1, 1.0, -1.0, 1, 1)) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(scale_factor(1.0, make(3, 1.0, 1.0, 1, 1)) == doctest::Approx(std::cbrt(4.0)).epsilon(1e-14));
  CHECK(scale_factor(2.0, make(1, 0.5, -1.0, 1, 1)) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("scale factor refuses times past the life span") {
  const auto p = make(1, -0.1, 0.0, 1, 1);
  CHECK(p.life_span() == doctest::Approx(20.0));
  CHECK_THROWS_AS(scale_factor(20.0, p), DomainError);
  CHECK_THROWS_AS(scale_factor(-1.0, p), DomainError);
  CHECK(scale_factor(10.0, p) == doctest::Approx(0.25));
}

TEST_CASE("power branch tends to the exponential branch near sigma = -1") {
  for (double H : {0.3, 1.0, -0.2}) {
    const double eps = 1e-6;
    const auto ds = make(2, H, -1.0, 1, 1);
    const auto near = make(2, H, -1.0 + eps, 1, 1);
    for (double t : {0.1, 1.0, 2.5}) CHECK(rel(scale_factor(t, near), scale_factor(t, ds)) < 1e-4);
  }
}

TEST_CASE("derivatives match chain-rule closed forms and finite differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uH(-1.0, 1.0), us(-2.5, 2.0), ua(0.5, 2.0);
  int checked = 0;
  for (int it = 0; it < 300; ++it) {
    const int n = 1 + it % 4;
    auto p = make(n, uH(rng), us(rng), 1.0, 1.0, ua(rng));
    if (it % 7 == 0) p.sigma = -1.0;
    if (it % 11 == 0) p.hubble = 0.0;
    const double t_end = std::min(p.life_span(), 3.0);
    const double t = 0.7 * t_end * (it % 5 + 1) / 6.0;
    const auto d = scale_derivatives(t, p);

    // Independent: differentiate a0 b^{k} with b = 1 + e H t / 2, k = 2/e.
    double adot, addot;
    if (p.sigma == -1.0) {
      adot = p.a0 * p.hubble * std::exp(p.hubble * t);
      addot = p.a0 * p.hubble * p.hubble * std::exp(p.hubble * t);
    } else {
      const double e = n * (1 + p.sigma);
      const double k = 2.0 / e;
      const double b = 1 + e * p.hubble * t / 2;
      adot = p.a0 * k * std::pow(b, k - 1) * e * p.hubble / 2;
      addot = p.a0 * k * (k - 1) * std::pow(b, k - 2) * std::pow(e * p.hubble / 2, 2);
    }
    CHECK(rel(d.a_dot, adot) < 1e-10);
    CHECK(rel(d.a_ddot, addot) < 1e-10);
    CHECK(rel(d.rate_dot, addot / d.a - std::pow(adot / d.a, 2)) < 1e-10);

    const double h = 1e-3 * std::max(1e-3, std::min(t, t_end - t));
    if (t > 2 * h) {
      const auto a = [&](double s) { return scale_factor(s, p); };
      const auto ad = [&](double s) { return scale_derivatives(s, p).a_dot; };
      CHECK(rel(fd(a, t, h), d.a_dot) < 1e-6);
      CHECK(rel(fd(ad, t, h), d.a_ddot) < 1e-6);
      const auto m2 = [&](double s) { return curved_mass_sq(s, p); };
      CHECK(rel(fd(m2, t, h), 2 * mass_mass_dot(t, p)) < 1e-6);
      ++checked;
    }
    CHECK((d.a_dot >= 0) == (p.hubble >= 0));
  }
  CHECK(checked > 100);
}

TEST_CASE("both mass definitions agree") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uH(-1.0, 1.0), us(-2.5, 2.0), um(0.0, 2.0), uc(0.5, 2.0);
  for (int it = 0; it < 200; ++it) {
    const int n = 1 + it % 4;
    const auto p = make(n, uH(rng), it % 6 == 0 ? -1.0 : us(rng), uc(rng), um(rng));
    const double t = 0.5 * std::min(p.life_span(), 4.0);
    const auto d = scale_derivatives(t, p);
    const double c2 = p.c * p.c;
    const double def = p.mass * p.mass - n * (n - 2.0) / (4 * c2) * d.rate * d.rate - n / (2 * c2) * d.a_ddot / d.a;
    CHECK(std::abs(curved_mass_sq(t, p) - def) <= 1e-10 * std::max(1.0, std::abs(def)));
  }
}

TEST_CASE("curved mass reference values") {
  CHECK(curved_mass_sq(3.0, make(1, 0.7, 0.0, 1, 3)) == doctest::Approx(9.0));
  CHECK(curved_mass_sq(1.3, make(2, 1.0, -1.0, 1, 2)) == doctest::Approx(3.0));
  CHECK(curved_mass_sq(0.0, make(2, 1.0, 1.0, 1, 0)) == doctest::Approx(1.0));
  const auto cm = curved_mass(0.0, make(2, 1.0, -1.0, 1, 0));
  CHECK_FALSE(cm.is_real());
  CHECK(cm.imaginary_magnitude() == doctest::Approx(1.0));
  CHECK_THROWS_AS(cm.real(), DomainError);
}

TEST_CASE("horizon times") {
  auto h = horizon_times(make(1, 0.5, 1.0, 1, 1));
  CHECK(h.t0.is_infinite());
  CHECK(h.t1.is_infinite());
  CHECK_FALSE(h.t2_defined());
  CHECK(horizon_times(make(1, 0.0, 1.0, 1, 1)).t2_value().is_infinite());
  CHECK(horizon_times(make(1, 0.5, -1.0, 1, 1)).t2_value().is_infinite());

  h = horizon_times(make(2, -1.0, 0.0, 1, 1));
  CHECK(h.t0.value() == doctest::Approx(1.0));
  CHECK(h.t1 == h.t0);

  const auto big_rip = make(2, -1.0, -0.25, 1, 1);
  h = horizon_times(big_rip);
  CHECK(h.t0.value() == doctest::Approx(4.0 / 3.0));
  CHECK(h.t1.value() == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(curved_mass_sq(h.t1.value(), big_rip)) < 1e-10);
  CHECK_FALSE(h.t2_defined());

  // T2 = T0 (1 - |H|/(mc) sqrt(R)), R = (n(1+s) - (p-1)(s n^2/4 + 1))/(p-1)
  const auto cp = make(1, -0.2, 0.0, 1, 2);
  h = horizon_times(cp, 1.5);
  const double R = (1.0 - 0.5) / 0.5;
  CHECK(h.t2_value().value() == doctest::Approx(10.0 * (1 - 0.1 * std::sqrt(R))).epsilon(1e-14));
  h = horizon_times(cp, 5.0);  // R < 0
  CHECK_FALSE(h.t2_defined());
  CHECK(std::get<UndefinedTime>(h.t2).offending < 0);
}

TEST_CASE("T1 <= T0 for random draws") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uH(-2.0, 2.0), us(-3.0, 2.0), um(0.0, 3.0);
  for (int it = 0; it < 500; ++it) {
    const auto p = make(1 + it % 3, uH(rng), us(rng), 1.0, um(rng));
    const auto h = horizon_times(p);
    CHECK(h.t1 <= h.t0);
    CHECK(h.t1 > 0.0);
  }
}

TEST_CASE("mass sign profile") {
  CHECK(mass_sign_profile(make(1, 0.0, 2.0, 1, 1), 64).ok());
  for (double s : {0.0, 0.5, 3.0, -1.0, -2.0}) {
    const auto r = mass_sign_profile(make(2, 0.8, s, 1, 2), 128);
    CHECK(r.ok());
    CHECK(*r.nonincreasing);
  }
  const auto inc = mass_sign_profile(make(2, 0.8, -0.5, 1, 2), 64);
  CHECK(inc.ok());
  CHECK_FALSE(*inc.nonincreasing);
  const auto rip = mass_sign_profile(make(2, -1.0, -0.25, 1, 1), 256);
  CHECK(rip.ok());
  CHECK(rip.window_end == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("tabulated background reproduces the closed form") {
  const auto p = make(1, 0.4, 1.0, 1, 1);
  const double dt = 1e-3;
  std::vector<double> a;
  for (int i = 0; i <= 3000; ++i) a.push_back(scale_factor(i * dt, p));
  const auto bg = Background::tabulated(1, 1.0, 1.0, dt, a);
  CHECK(bg.a(1.2345) == doctest::Approx(scale_factor(1.2345, p)).epsilon(1e-10));
  CHECK(bg.mass_sq(1.5) == doctest::Approx(curved_mass_sq(1.5, p)).epsilon(1e-5));
}
