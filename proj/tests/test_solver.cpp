#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flrw/errors.hpp"
#include "flrw/solver.hpp"

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

GridSpec grid(int N = 64, double L = 2 * M_PI) {
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

double rel_l2(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b) / l2_norm(b); }

}  // namespace

TEST_CASE("static plane wave follows cos(omega t)") {
  const auto p = make(0.0, 0.0, 0.9, 1.2, 1.5);
  const Background bg(p);
  const GridSpec g = grid();
  const int j = 3;
  const double k = j;  // L = 2 pi
  const double w = 1.2 * std::sqrt(k * k / (1.5 * 1.5) + 0.9 * 0.9);
  FieldState d;
  d.u = to_spectral(sample(g, [&](const std::array<double, 3>& x) { return Complex(std::cos(k * x[0]), 0.0); }));
  d.ut = SpectralField(g);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.output_stride = 100;
  for (Scheme s : {Scheme::mol, Scheme::duhamel}) {
    cfg.scheme = s;
    const Trajectory t = s == Scheme::mol ? evolve_mol(d, 2.0, bg, {}, cfg) : evolve_duhamel(d, 2.0, bg, {}, cfg);
    REQUIRE(t.states.size() == 21);
    double err = 0.0;
    for (const auto& st : t.states) {
      const SpectralField exact = std::cos(w * st.t) * d.u;
      err = std::max(err, l2_norm(st.u - exact) / l2_norm(d.u));
      err = std::max(err, l2_norm(st.ut + w * std::sin(w * st.t) * d.u) / (w * l2_norm(d.u)));
    }
    CHECK_MESSAGE(err < 1e-9, to_string(s));
  }
  const Trajectory f = evolve_free(d, 2.0, bg, cfg);
  CHECK(l2_norm(f.states.back().u - std::cos(w * 2.0) * d.u) / l2_norm(d.u) < 1e-9);
}

TEST_CASE("zero data stays exactly zero") {
  Nonlinearity nl;
  nl.lambda = -1.0;
  nl.p = 3.0;
  const Background bg(make(0.5, 1.0, 1.0));
  FieldState d;
  d.u = SpectralField(grid());
  d.ut = SpectralField(grid());
  SolverConfig cfg;
  cfg.dt = 1e-3;
  for (const auto& t : {evolve_mol(d, 1.0, bg, nl, cfg), evolve_duhamel(d, 1.0, bg, nl, cfg)}) {
    for (const auto& s : t.states) {
      for (const auto& c : s.u.coef) CHECK(c == Complex(0.0));
      for (const auto& c : s.ut.coef) CHECK(c == Complex(0.0));
    }
  }
}

TEST_CASE("static runs are time reversible") {
  Nonlinearity nl;
  nl.lambda = 1.0;
  nl.p = 3.0;
  const Background bg(make(0.0, 0.0, 1.0));
  const GridSpec g = grid(128, 20.0);
  const FieldState d = bump(g, 1.0, 1.0, 0.5, nl);
  SolverConfig cfg;
  cfg.dt = 2e-3;
  const FieldState fwd = evolve_mol(d, 2.0, bg, nl, cfg).states.back();
  FieldState rev = fwd;
  rev.t = 0.0;
  rev.ut *= -1.0;
  const FieldState back = evolve_mol(rev, 2.0, bg, nl, cfg).states.back();
  CHECK(rel_l2(back.u, d.u) < 1e-8);
  CHECK(l2_norm(back.ut + d.ut) / l2_norm(d.ut) < 1e-8);
}

TEST_CASE("MoL is fourth order on a nonlinear run") {
  Nonlinearity nl;
  nl.lambda = 1.0;
  nl.p = 3.0;
  const Background bg(make(0.5, 1.0, 1.0));
  const GridSpec g = grid(128, 20.0);
  const FieldState d = bump(g, 1.0, 1.0, 0.0, nl);
  auto run = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    return evolve_mol(d, 1.0, bg, nl, cfg).states.back().u;
  };
  const SpectralField ref = run(0.0025);
  const double e1 = rel_l2(run(0.04), ref), e2 = rel_l2(run(0.02), ref);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("Duhamel and MoL agree on small nonlinear data") {
  Nonlinearity nl;
  nl.lambda = -1.0;
  nl.p = 3.0;
  const Background bg(make(0.5, -1.0, 1.0));
  const GridSpec g = grid(128, 20.0);
  const FieldState d = bump(g, 0.3, 1.5, 0.0, nl);
  SolverConfig cfg;
  cfg.dt = 2e-3;
  const auto a = evolve_mol(d, 2.0, bg, nl, cfg);
  const auto b = evolve_duhamel(d, 2.0, bg, nl, cfg);
  REQUIRE(a.states.size() == b.states.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) worst = std::max(worst, rel_l2(b.states[i].u, a.states[i].u));
  CHECK(worst < 1e-8);
  for (double r : b.contraction_ratios) CHECK(r < 1.0);
}

TEST_CASE("runs stop short of a finite horizon") {
  // sigma < -1 with H > 0 has a finite life span.
  const Background bg(make(0.2, -3.0, 3.0));
  const double t0 = bg.life_span();
  REQUIRE(std::isfinite(t0));
  const GridSpec g = grid(32);
  FieldState d = bump(g, 0.1, 1.0, 0.0, {});
  SolverConfig cfg;
  cfg.dt = 1e-2;
  const auto t = evolve_mol(d, 2.0 * t0, bg, {}, cfg);
  CHECK(t.stop_reason == "horizon");
  CHECK(t.final_time() == doctest::Approx(cfg.horizon_fraction * t0).epsilon(1e-12));
}

TEST_CASE("solver configuration is validated") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.horizon_fraction = 1.5;
  CHECK_THROWS(cfg.validate());
  CHECK(parse_scheme("duhamel") == Scheme::duhamel);
  CHECK_THROWS(parse_scheme("leapfrog"));
}

TEST_CASE("nonlinear data is projected onto the dealiased band") {
  Nonlinearity nl;
  nl.lambda = 1.0;
  const GridSpec g = grid(32);
  FieldState s;
  s.u = SpectralField(g);
  s.ut = SpectralField(g);
  for (auto& c : s.u.coef) c = 1.0;
  const FieldState p = prepare_initial(s, nl);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK((p.u.coef[i] != Complex(0.0)) == g.in_band(i));
  const FieldState lin = prepare_initial(s, Nonlinearity{});
  for (const auto& c : lin.u.coef) CHECK(c == Complex(1.0));
}

TEST_CASE("scattering residual vanishes at the last time and decays for small data") {
  Nonlinearity nl;
  nl.lambda = 1.0;
  nl.p = 5.0;
  const Background bg(make(0.5, -1.0, 1.0));
  const GridSpec g = grid(64, 20.0);
  const FieldState d = bump(g, 0.2, 2.0, 0.0, nl);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.output_stride = 10;
  const auto t = evolve_duhamel(d, 6.0, bg, nl, cfg);
  const auto sp = scattering_profile(t, bg);
  REQUIRE(sp.residual.size() == t.states.size());
  CHECK(sp.residual.back() <= 1e-12 * sp.residual.front());
  CHECK(sp.window_max(0.75, 1.0) < sp.window_max(0.0, 0.25));
}
