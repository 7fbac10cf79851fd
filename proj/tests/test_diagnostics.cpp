#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flrw/diagnostics.hpp"
#include "flrw/errors.hpp"

using namespace flrw;

namespace {

CosmologyParams make(double H, double sigma, double m, double c = 1.0, double a0 = 1.0) {
  CosmologyParams p;
  p.n = 1;
  p.hubble = H;
  p.sigma = sigma;
  p.c = c;
  p.mass = m;
  p.a0 = a0;
  return p;
}

GridSpec grid(int N, double L) {
  GridSpec g;
  g.points = N;
  g.length = L;
  return g;
}

FieldState bump(const GridSpec& g, double amp, double width, double rho, const Nonlinearity& nl) {
  FieldState s;
  s.u = to_spectral(sample(g, [&](const std::array<double, 3>& x) {
    const double y = x[0] - g.length / 2;
    return Complex(amp * std::exp(-y * y / (width * width)), 0.0);
  }));
  s.ut = rho * s.u;
  return prepare_initial(s, nl);
}

FieldState flat(const GridSpec& g, double amp, double rho) {
  FieldState s;
  s.u = SpectralField(g);
  s.u.coef[0] = amp;
  s.ut = rho * s.u;
  return s;
}

double ledger_drift(const CosmologyParams& p, const Nonlinearity& nl, LedgerMode mode, double dt) {
  const Background bg(p);
  const GridSpec g = grid(128, 20.0);
  SolverConfig cfg;
  cfg.dt = dt;
  LedgerAccumulator acc(bg, nl, g, mode, TimeRule::simpson);
  evolve_mol(bump(g, 1.0, 1.0, 0.3, nl), 2.0, bg, nl, cfg, acc.observer());
  return acc.finish(10).max_drift;
}

}  // namespace

TEST_CASE("linear ledger closes and converges") {
  const auto p = make(0.5, 1.0, 1.0);
  const double d1 = ledger_drift(p, {}, LedgerMode::linear, 2e-3);
  const double d2 = ledger_drift(p, {}, LedgerMode::linear, 1e-3);
  CHECK(d1 < 1e-7);
  CHECK(d1 / d2 > 4.0);
}

TEST_CASE("nonlinear ledger in both bookkeeping modes") {
  Nonlinearity nl;
  nl.lambda = 1.0;
  nl.p = 3.0;
  for (const auto& p : {make(0.0, 0.0, 1.0), make(0.5, 1.0, 1.0)}) {
    CHECK(ledger_drift(p, nl, LedgerMode::nonlinear, 1e-3) < 1e-6);
    CHECK(ledger_drift(p, nl, LedgerMode::linear, 1e-3) < 1e-6);
  }
}

TEST_CASE("ledger refusals and zero data") {
  const Background bg(make(0.5, 1.0, 1.0));
  const GridSpec g = grid(32, 10.0);
  Nonlinearity nl;
  nl.lambda = Complex(1.0, 0.5);
  CHECK_THROWS_AS(LedgerAccumulator(bg, nl, g, LedgerMode::nonlinear), PreconditionError);
  CHECK_NOTHROW(LedgerAccumulator(bg, nl, g, LedgerMode::linear));

  nl.lambda = -1.0;
  LedgerAccumulator acc(bg, nl, g, LedgerMode::nonlinear);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  evolve_mol(flat(g, 0.0, 0.0), 1.0, bg, nl, cfg, acc.observer());
  const auto l = acc.finish();
  CHECK(l.max_drift == 0.0);
  for (const auto& r : l.rows) {
    CHECK(r.total == 0.0);
    CHECK(r.kinetic == 0.0);
  }
  CHECK(EnergyLedger::columns().back() == "total");
}

TEST_CASE("virial residual is second order in the stored spacing") {
  Nonlinearity nl;
  nl.lambda = 1.0;
  nl.p = 3.0;
  const Background bg(make(0.3, 0.0, 1.0));
  const GridSpec g = grid(128, 20.0);
  const FieldState d = bump(g, 1.0, 1.0, 0.0, nl);
  auto res = [&](int stride) {
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.output_stride = stride;
    return virial_check(evolve_mol(d, 2.0, bg, nl, cfg), bg, nl).max_residual;
  };
  const double r1 = res(40), r2 = res(20);
  CHECK(r1 / r2 > 3.5);
  CHECK(r1 / r2 < 4.5);
}

TEST_CASE("data size of a plane wave") {
  const double L = 2 * M_PI, k = 3.0, mu0 = 0.5;
  const auto p = make(0.4, 1.0, 1.3, 2.0, 1.5);
  const GridSpec g = grid(32, L);
  FieldState d;
  d.u = to_spectral(sample(g, [&](const std::array<double, 3>& x) { return Complex(std::cos(k * x[0]), 0.0); }));
  d.ut = 0.5 * d.u;
  const double base = std::pow(k, mu0) * std::sqrt(L / 2);
  const double m0 = std::sqrt(curved_mass_sq(0.0, p));
  const double expect = 0.5 * base / 2.0 + k * base / 1.5 + m0 * base;
  CHECK(data_size(d, Background(p), mu0) == doctest::Approx(expect).epsilon(1e-12));

  // M(0)^2 < 0: the mass term is undefined.
  const auto neg = make(1.0, -2.5, 0.05);
  REQUIRE(curved_mass_sq(0.0, neg) < 0.0);
  CHECK_THROWS_AS(data_size(d, Background(neg), mu0), PreconditionError);
}

TEST_CASE("X-norm hypotheses and components") {
  const GridSpec g = grid(64, 20.0);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  const FieldState d = bump(g, 0.5, 1.0, 0.0, {});
  {
    const Background bg(make(0.5, 1.0, 1.0));
    const auto r = xnorm_report(evolve_mol(d, 1.0, bg, {}, cfg), bg, {}, {0.0});
    REQUIRE(r.components.size() == 1);
    const auto& c = r.components[0];
    CHECK(c.norm() > 0.0);
    CHECK(c.mass_sup >= std::sqrt(curved_mass_sq(0.0, bg.params())) * l2_norm(d.u) * (1 - 1e-12));
    CHECK(r.forcing_l1l2 == 0.0);
  }
  const Background contracting(make(-0.2, 0.0, 1.0));
  CHECK_THROWS_AS(xnorm_report(evolve_mol(d, 1.0, contracting, {}, cfg), contracting, {}, {0.0}),
                  PreconditionError);
}

TEST_CASE("homogeneous functionals match the closed form") {
  Nonlinearity nl;
  nl.lambda = -1.0;
  nl.p = 5.0;
  nl.kappa = 6.0;
  nl.kappa_star = 0.9;
  const auto p = make(-0.1, 0.0, 1.0);
  const GridSpec g = grid(64, 10.0);
  const double A = 2.0, rho = 1.0, V = 10.0;
  const auto f = initial_data_functionals(flat(g, A, rho), Background(p), nl);
  const auto e = make_functionals(rho * rho * A * A * V, 0.0, A * A * V, std::pow(A, 6) * V, rho * A * A * V, p, nl);
  CHECK(f.u0_sq == doctest::Approx(e.u0_sq).epsilon(1e-13));
  CHECK(f.u0_lp1 == doctest::Approx(e.u0_lp1).epsilon(1e-13));
  CHECK(f.energy == doctest::Approx(e.energy).epsilon(1e-12));
  REQUIRE(f.t_star);
  CHECK(*f.t_star == doctest::Approx(*e.t_star).epsilon(1e-12));

  // T* is inversely proportional to kappa_*.
  nl.kappa_star = 0.45;
  const auto half = initial_data_functionals(flat(g, A, rho), Background(p), nl);
  REQUIRE(half.t_star);
  CHECK(*half.t_star == doctest::Approx(2.0 * *f.t_star).epsilon(1e-14));
}

TEST_CASE("blow-up monitor refuses uncertified data") {
  Nonlinearity nl;
  nl.lambda = -1.0;
  nl.p = 3.0;
  const auto p = make(0.0, 0.0, 1.0);
  const Background bg(p);
  const GridSpec g = grid(32, 10.0);
  const FieldState small = bump(g, 0.01, 1.0, 0.0, nl);
  const auto f = initial_data_functionals(small, bg, nl);
  const auto rep = classify_blowup(p, nl, f);
  REQUIRE_FALSE(rep.certified);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  const auto t = evolve_mol(small, 0.1, bg, nl, cfg);
  CHECK_THROWS_AS(blowup_monitor(t, bg, nl, rep), PreconditionError);
  CHECK_THROWS_AS(BlowupAccumulator(bg, nl, rep), PreconditionError);
  CHECK_THROWS_AS(blowup_monitor(t, bg, nl, classify_local(RegimeQuery{p, nl, {}, {}, 1.0})), PreconditionError);
}

TEST_CASE("certified blow-up run keeps the envelope") {
  Nonlinearity nl;
  nl.lambda = -1.0;
  nl.p = 3.0;
  nl.kappa = 4.0;
  nl.kappa_star = 0.45;
  const auto p = make(0.0, 0.0, 1.0);
  const Background bg(p);
  const GridSpec g = grid(64, 10.0);
  const FieldState d = flat(g, 3.0, 1.0);
  const auto f = initial_data_functionals(d, bg, nl);
  const auto rep = classify_blowup(p, nl, f);
  REQUIRE(rep.certified);
  SolverConfig cfg;
  cfg.adaptive = true;
  cfg.dt = 1e-3;
  cfg.min_dt = 1e-12;
  cfg.norm_cap_factor = 2e3;
  BlowupAccumulator acc(bg, nl, rep);
  const auto t = evolve_mol(d, 2.0 * *f.t_star, bg, nl, cfg, acc.observer());
  const auto b = acc.finish(t);
  CHECK(b.claim_ok);
  CHECK(b.envelope_ok);
  CHECK(b.detected_in_time);
  REQUIRE(b.detected_time);
  CHECK(*b.detected_time <= 1.1 * *f.t_star);
}
