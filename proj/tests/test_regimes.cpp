#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flrw/errors.hpp"
#include "flrw/regimes.hpp"

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

// Test-side oracle: composite Simpson in log-time for the B integrand, written
// directly from the scale-factor formula.
double b_oracle(double T, const CosmologyParams& p, double mu0, double pw, double inv_qs) {
  const double e = p.n * (1 + p.sigma);
  auto a_over = [&](double t) {
    return p.sigma == -1 ? std::exp(p.hubble * t) : std::pow(1 + e * p.hubble * t / 2, 2 / e);
  };
  auto g = [&](double t) {
    const double r = a_over(t);
    const double rate = p.hubble * std::pow(r, -e / 2);
    return std::pow(r, -mu0 * (pw - 1)) * std::pow(2 * rate, inv_qs - 1);
  };
  if (inv_qs == 0) return std::max(g(0), g(T));
  const double q = 1 / inv_qs;
  const int N = 200000;
  double s = 0;
  for (int i = 0; i <= N; ++i) {
    const double t = T * i / N;
    const double w = (i == 0 || i == N) ? 1 : (i % 2 ? 4 : 2);
    s += w * std::pow(g(t), q);
  }
  return std::pow(s * T / (3.0 * N), inv_qs);
}

}  // namespace

TEST_CASE("exponent reference values") {
  const auto e = exponent_set(make(3, 0, 0, 1, 1), {0, 0}, 3.0, 1.0 / 3.0);
  CHECK(e.delta == doctest::Approx(0.0));
  CHECK_FALSE(e.qstar_finite());
  CHECK(e.theta == doctest::Approx(1.0));
  CHECK(e.p_mu0.value() == doctest::Approx(3.0));

  CHECK(exponent_set(make(4, 0, 0, 1, 1), {0, 0}, 1.5).p2.value() == doctest::Approx(2.0));
  CHECK(*exponent_set(make(3, 0, 0, 1, 1), {0, 0}, 2.0).p_star == doctest::Approx(4.0));

  const auto cubic = exponent_set(make(1, 0, 0, 1, 1), {0, 0}, 3.0);
  CHECK(cubic.inv_q == doctest::Approx(0.5));
  CHECK(cubic.inv_qstar == doctest::Approx(0.5));
  CHECK(cubic.delta == doctest::Approx(2.0));
}

TEST_CASE("exponent hypotheses are reported together") {
  try {
    exponent_set(make(3, 0, 0, 1, 1), {0.6, 0.0}, 9.0, 0.9);
    FAIL("expected HypothesisError");
  } catch (const HypothesisError& err) {
    CHECK(err.violations().size() >= 2);
  }
  CHECK_THROWS_AS(exponent_set(make(2, 0, 0, 1, 1), {1.0, 1.0}, 2.0), HypothesisError);
}

TEST_CASE("gamma two forms agree") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int it = 0; it < 200; ++it) {
    const int n = 1 + it % 4;
    const double mu0 = (n <= 2 ? n / 2.0 : n / 2.0 - 1) * 0.9 * u(rng);
    const auto cp = make(n, 0.5, -0.9 + 3 * u(rng), 1, 1);
    const double pmax = n >= 3 ? 1 + 2 / (n - 2 * mu0 - 2) : 6.0;
    const double p = 1 + (pmax - 1) * u(rng);
    const double iq = default_inv_q(n, mu0, p) * u(rng);
    const auto e = exponent_set(cp, {mu0, mu0}, p, iq);
    if (!e.gamma) continue;
    const double qs = 1 / e.inv_qstar;
    const double alt = 2 * mu0 * (p - 1) * qs / (n * (1 + cp.sigma)) + 1 - qs;
    CHECK(*e.gamma == doctest::Approx(alt).epsilon(1e-10));
    CHECK(e.theta >= 0.0);
    CHECK(e.theta <= 1.0 + 1e-12);
  }
}

TEST_CASE("B closed form reference points") {
  const auto ds = make(1, 0.5, -1, 1, 1);
  const auto e = exponent_set(ds, {0, 0}, 3.0);  // q* = 2
  const auto B = b_integral(2.0, ds, e, BMethod::closed_form);
  CHECK(B.family == 6);
  CHECK(B.value.value() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(b_integral(2.0, ds, e, BMethod::quadrature).value.value() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  // Bare-rate integral differs by 2^{1/q*-1}.
  CHECK(b_integral_literal(2.0, ds, e) == doctest::Approx(2.0).epsilon(1e-10));

  const auto flat = make(2, 0, 0.3, 1, 1);
  const auto e1 = exponent_set(flat, {0, 0}, 2.0, 0.0);
  CHECK(b_integral(3.5, flat, e1, BMethod::closed_form).value.value() == doctest::Approx(3.5));
  CHECK(b_integral(3.5, flat, e1, BMethod::quadrature).value.value() == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("every closed family matches an independent quadrature") {
  struct Row {
    int family;
    CosmologyParams cp;
    double mu0, p;
    std::optional<double> iq;
  };
  const std::vector<Row> rows = {
      {1, make(1, 0, 0, 1, 1), 0.0, 3.0, 0.0},
      {2, make(1, 0.7, 0.5, 1, 1), 0.2, 7.0, 0.05},
      {3, make(1, 0.7, 0.5, 1, 1), 0.0, 3.0, {}},
      {3, make(2, 0.4, -1.5, 1, 1), 0.3, 2.0, 0.2},
      {4, make(1, 0.7, 0.5, 1, 1), 0.25, 1 + 1.5 / 0.5, 0.05},
      {5, make(1, 0.6, -1, 1, 1), 0.3, 3.0, 0.2},
      {6, make(2, 0.6, -1, 1, 2), 0.0, 2.0, {}},
      {7, make(1, 0.5, 1.0, 1, 1), 0.0, 5.0, {}},
      {8, make(1, 0.5, 0.0, 1, 1), 0.4, 21.0, {}},
      {8, make(1, 0.5, -1.0, 1, 1), 0.0, 5.0, {}},
  };
  for (const auto& r : rows) {
    const auto e = exponent_set(r.cp, {r.mu0, r.mu0}, r.p, r.iq);
    CAPTURE(r.family);
    REQUIRE(closed_form_family(r.cp, e) == r.family);
    for (double T : {0.3, 1.7, 4.0}) {
      const double closed = b_integral(T, r.cp, e, BMethod::closed_form).value.value();
      const double quad = b_integral(T, r.cp, e, BMethod::quadrature).value.value();
      const double oracle = b_oracle(T, r.cp, r.mu0, r.p, e.inv_qstar);
      CHECK(closed == doctest::Approx(oracle).epsilon(1e-8));
      CHECK(quad == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("saturation bounds") {
  const auto cp = make(1, 0.7, 0.5, 1, 1);
  const auto e = exponent_set(cp, {0.2, 0.2}, 7.0, 0.05);
  const auto k = regime_constants(cp, e, 1.0);
  for (double T : {1.0, 10.0, 1e3, 1e6}) CHECK(b_integral(T, cp, e, BMethod::closed_form).value.value() <= *k.B1);
  const auto ds = make(1, 0.6, -1, 1, 1);
  const auto e5 = exponent_set(ds, {0.3, 0.3}, 3.0, 0.2);
  const auto k5 = regime_constants(ds, e5, 1.0);
  for (double T : {1.0, 10.0, 100.0}) CHECK(b_integral(T, ds, e5, BMethod::closed_form).value.value() <= *k5.B3);
}

TEST_CASE("A(T) identity with B(T)") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int it = 0; it < 20; ++it) {
    const auto cp = make(1, 0.2 + u(rng), it % 2 ? -1.0 : 2 * u(rng), 1, 1 + u(rng), 0.5 + u(rng));
    const double mu0 = 0.4 * u(rng);
    const double p = 1.5 + 3 * u(rng);
    const auto e = exponent_set(cp, {mu0, mu0}, p);
    const double T = 0.5 + 3 * u(rng);
    const double A = a_weight(T, cp, e).value();
    const double B = b_integral(T, cp, e, BMethod::quadrature).value.value();
    const double M = std::sqrt(curved_mass_sq(T, cp));
    CHECK(A == doctest::Approx(std::pow(cp.a0, -mu0 * (p - 1)) * std::pow(M, -e.delta) * B).epsilon(1e-9));
  }
  const auto flat = make(1, 0, 0, 1, 2.0, 1.5);
  const auto e = exponent_set(flat, {0.2, 0.2}, 3.0, 0.0);
  CHECK(a_weight(2.0, flat, e).value() ==
        doctest::Approx(std::pow(2.0, -e.delta) * std::pow(1.5, -0.2 * 2) * 2.0).epsilon(1e-12));
  CHECK(a_weight(1e-9, make(1, 0.5, 0, 1, 1), exponent_set(make(1, 0.5, 0, 1, 1), {0, 0}, 3.0)).value() < 1e-3);
  CHECK_THROWS_AS(a_weight(0.7, make(2, -1.0, -0.25, 1, 1), exponent_set(make(2, -1.0, -0.25, 1, 1), {0, 0}, 2.0)),
                  PreconditionError);
}

TEST_CASE("static local case") {
  RegimeQuery q;
  q.cosmo = make(1, 0, 0.4, 1, 1.5);
  q.nl.lambda = 1.0;
  q.nl.p = 3.0;
  q.inv_q = 0.0;
  q.D = 0.8;
  const auto r = classify_local(q);
  CHECK(r.matched_case == "local.i");
  const double G = std::pow(1.0 / 0.8, 2.0);
  const double T = G * std::pow(1.5, r.exponents->delta);
  CHECK(r.admissible_t.value() == doctest::Approx(T).epsilon(1e-12));
  CHECK(r.master->t == doctest::Approx(T).epsilon(1e-10));
}

TEST_CASE("de Sitter explicit local case") {
  RegimeQuery q;
  q.cosmo = make(1, 0.4, -1, 1, 1.2);
  q.nl.lambda = 1.0;
  q.nl.p = 3.0;
  q.D = 3.0;
  const auto r = classify_local(q);
  CHECK(r.certified);
  const auto& e = *r.exponents;
  const double G = std::pow(1.0 / 3.0, 2.0);
  const double k2 = std::pow(0.2, 2.0);
  const double T = std::pow(0.8 * G * std::pow(1.44 - k2, e.delta / 2), 1 / e.inv_qstar) / 0.8;
  bool found = false;
  for (const auto& c : r.cases) {
    if (c.label == "local.xi") {
      found = c.matched;
      CHECK(c.t_bound.value() == doctest::Approx(T).epsilon(1e-12));
    }
  }
  CHECK(found);
  CHECK(T <= r.master->t * (1 + 1e-9));
}

TEST_CASE("zero data admits every time up to T1") {
  RegimeQuery q;
  q.cosmo = make(1, 0.4, 1.0, 1, 1.2);
  q.nl.lambda = 1.0;
  q.nl.p = 3.0;
  q.D = 0.0;
  const auto r = classify_local(q);
  CHECK(r.admissible_t.is_infinite());
  CHECK(r.constants->G.is_infinite());
}

TEST_CASE("local hypotheses") {
  RegimeQuery q;
  q.cosmo = make(1, -0.4, 1.0, 1, 1.2);
  q.nl.p = 3.0;
  CHECK_THROWS_AS(classify_local(q), HypothesisError);
  q.cosmo = make(1, 0.4, -0.5, 1, 1.2);
  CHECK_THROWS_AS(classify_local(q), HypothesisError);
  q.cosmo = make(1, 0.4, 1.0, 1, 1.2);
  q.orders = {0.0, 3.5};
  q.nl.p = 2.5;
  CHECK_THROWS_AS(classify_local(q), HypothesisError);
  q.nl.p = 3.0;  // odd power, polynomial: mu >= p allowed
  CHECK_NOTHROW(classify_local(q));
}

TEST_CASE("global certification") {
  RegimeQuery q;
  q.cosmo = make(1, 0.5, -1, 1, 1);
  q.nl.lambda = -1.0;
  q.nl.p = 5.0;
  const auto e = exponent_set(q.cosmo, {0, 0}, 5.0);
  REQUIRE_FALSE(e.qstar_finite());
  const double bound = std::pow(0.5 * std::pow(1 - 0.0625, e.delta / 2), 0.25);
  q.D = 0.99 * bound;
  auto r = classify_global(q);
  CHECK(r.certified);
  CHECK(r.matched_case == "small_global.iv");
  CHECK(r.admissible_t.is_infinite());
  REQUIRE(r.sup_a);
  CHECK(std::pow(q.D, 4.0) * *r.sup_a <= 1.0);

  q.D = 1.01 * bound;
  r = classify_global(q);
  CHECK_FALSE(r.certified);

  q.nl.lambda = 1.0;
  q.nl.p = 3.0;
  q.D = 50.0;
  r = classify_global(q);
  CHECK(r.certified);
  CHECK(r.matched_case == "large_global");
}

TEST_CASE("blow-up classification") {
  Nonlinearity nl;
  nl.lambda = -1.0;
  nl.p = 5.0;
  nl.kappa = 6.0;
  nl.kappa_star = 0.9;
  const auto cp = make(1, -0.1, 0.0, 1, 1);
  // Homogeneous data u0 = A on a box of volume V, u1 = rho u0.
  const double A = 2.0, V = 10.0, rho = 1.0;
  auto f = make_functionals(rho * rho * A * A * V, 0.0, A * A * V, std::pow(A, 6) * V, rho * A * A * V, cp, nl);
  CHECK(f.energy < 0);
  CHECK(*f.t_star == doctest::Approx(1.0 / (2 * 0.9 * (rho - 0.1))));
  auto r = classify_blowup(cp, nl, f);
  CHECK(r.certified);
  CHECK(r.matched_case == "blowup.iii");

  const auto zero = make_functionals(0, 0, 0, 0, 0, cp, nl);
  r = classify_blowup(cp, nl, zero);
  CHECK_FALSE(r.certified);

  // de Sitter contraction with m = n|H|/2c: J = (p-1) m^2 c^2 + (p-1)(1 - n^2/4) H^2 >= 0.
  const auto ds = make(2, -1.0, -1.0, 1, 1);
  nl.p = 3.0;
  nl.kappa = 4.0;
  nl.kappa_star = 0.4;
  f = make_functionals(4.0, 0.0, 4.0, 200.0, 8.0, ds, nl);
  r = classify_blowup(ds, nl, f);
  CHECK(r.matched_case == "blowup.ii");
  CHECK(r.blowup->direct_ok);
}

TEST_CASE("matched blow-up cases imply the direct hypotheses") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  int matched = 0;
  for (int it = 0; it < 400; ++it) {
    const int n = 1 + it % 3;
    const int kind = it % 4;
    const double H = kind == 0 ? 0.0 : -0.05 - 0.5 * u(rng);
    double s = kind == 1 ? -1.0 : (kind == 2 ? 0.0 : -u(rng) * std::min(1.0, 4.0 / (n * n)));
    const double m = 2.5 * u(rng);
    const auto cp = make(n, H, s, 1, m);
    Nonlinearity nl;
    nl.lambda = -1.0;
    nl.p = (H != 0 ? 1 + 4.0 / n : 1.0) + 0.01 + 4 * u(rng);
    nl.kappa = nl.p + 1;
    nl.kappa_star = (nl.kappa - 2) / 4 * (0.05 + 0.9 * u(rng));
    const double u0 = 1 + u(rng), rho = 0.1 + 3 * u(rng);
    const auto f = make_functionals(rho * rho * u0, 0.1 * u0, u0, 50 * u0, rho * u0, cp, nl);
    const auto r = classify_blowup(cp, nl, f);
    if (r.matched_case != "none") {
      ++matched;
      CAPTURE(r.matched_case);
      CHECK(r.blowup->direct_ok);
    }
  }
  CHECK(matched > 50);
}
