#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "flrw/errors.hpp"
#include "flrw/spectral.hpp"

using namespace flrw;

namespace {

GridSpec grid1(int N, double L = 2 * M_PI) {
  GridSpec g;
  g.points = N;
  g.length = L;
  return g;
}

SpectralField random_band(const GridSpec& g, std::mt19937_64& rng, bool real) {
  std::normal_distribution<double> nd;
  PhysicalField p(g);
  for (auto& v : p.values) v = Complex(nd(rng), real ? 0.0 : nd(rng));
  SpectralField s = to_spectral(p);
  dealias(s);
  return s;
}

}  // namespace

TEST_CASE("Parseval against the collocation sum") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2}) {
    GridSpec g = grid1(16, 3.0);
    g.n_dim = n;
    std::normal_distribution<double> nd;
    PhysicalField p(g);
    for (auto& v : p.values) v = Complex(nd(rng), nd(rng));
    double direct = 0.0;
    for (const auto& v : p.values) direct += std::norm(v) * g.cell_volume();
    CHECK(l2_norm(to_spectral(p)) == doctest::Approx(std::sqrt(direct)).epsilon(1e-13));
  }
}

TEST_CASE("transform round trip") {
  std::mt19937_64 rng(3);
  GridSpec g = grid1(32);
  g.n_dim = 2;
  const SpectralField s = random_band(g, rng, false);
  const SpectralField back = to_spectral(to_physical(s));
  double err = 0.0;
  for (std::size_t i = 0; i < s.coef.size(); ++i) err = std::max(err, std::abs(back.coef[i] - s.coef[i]));
  CHECK(err < 1e-14);
}

TEST_CASE("plane-wave norms") {
  const double L = 5.0;
  const GridSpec g = grid1(64, L);
  const int j = 3;
  const double k = 2 * M_PI * j / L;
  const SpectralField u = to_spectral(sample(g, [&](const std::array<double, 3>& x) {
    return std::exp(Complex(0.0, k * x[0]));
  }));
  const double sv = std::sqrt(L);
  CHECK(l2_norm(u) == doctest::Approx(sv).epsilon(1e-13));
  CHECK(gradient_norm(u) == doctest::Approx(k * sv).epsilon(1e-13));
  CHECK(sobolev_norm(u, 1.5, true) == doctest::Approx(std::pow(k, 1.5) * sv).epsilon(1e-12));
  CHECK(sobolev_norm(u, 1.0, false) == doctest::Approx(std::sqrt(1 + k * k) * sv).epsilon(1e-12));
  CHECK(lebesgue_norm(u, HUGE_VAL) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(lebesgue_norm(u, 2.0) == doctest::Approx(sv).epsilon(1e-13));
  CHECK(spectral_tail_fraction(u) < 1e-28);
}

TEST_CASE("homogeneous weight drops the zero mode") {
  const GridSpec g = grid1(8);
  SpectralField u(g);
  u.coef[0] = 2.0;
  CHECK(sobolev_norm(u, 0.0, true) == doctest::Approx(2.0 * std::sqrt(g.volume())));
  CHECK(sobolev_norm(u, 0.5, true) == 0.0);
  CHECK(sobolev_norm(u, -1.0, true) == 0.0);
  CHECK(sobolev_norm(u, -1.0, false) == doctest::Approx(2.0 * std::sqrt(g.volume())));
}

TEST_CASE("2/3 rule zeroes exactly the outer band") {
  const GridSpec g = grid1(32);
  SpectralField u(g);
  for (auto& c : u.coef) c = 1.0;
  dealias(u);
  for (std::size_t i = 0; i < u.coef.size(); ++i) {
    const int j = g.signed_index(static_cast<int>(i));
    CHECK((std::abs(j) <= 10) == (u.coef[i] != Complex(0.0)));
  }
}

// Cubic term against a direct triple convolution of the coefficients.
TEST_CASE("padded cubic matches the truncated convolution") {
  std::mt19937_64 rng(7);
  const GridSpec g = grid1(16);
  const SpectralField u = random_band(g, rng, true);
  Nonlinearity nl;
  nl.lambda = 1.0;
  nl.p = 3.0;
  const NonlinearTerm h(g, nl, 2);
  const SpectralField got = h(u, 1.0);

  const int N = g.points;
  auto at = [&](int j) -> Complex {
    if (j < -N / 2 || j >= N / 2) return 0.0;
    return u.coef[static_cast<std::size_t>(j < 0 ? j + N : j)];
  };
  double err = 0.0, scale = 0.0;
  for (int out = -N / 2; out < N / 2; ++out) {
    Complex sum = 0.0;
    if (std::abs(out) <= g.dealias_cutoff()) {
      for (int a = -N / 2; a < N / 2; ++a)
        for (int b = -N / 2; b < N / 2; ++b) sum += at(a) * at(b) * at(out - a - b);
    }
    const Complex v = got.coef[static_cast<std::size_t>(out < 0 ? out + N : out)];
    err = std::max(err, std::abs(v - sum));
    scale = std::max(scale, std::abs(sum));
  }
  CHECK(err <= 1e-12 * scale);
}

TEST_CASE("composed and power forms of h agree") {
  std::mt19937_64 rng(5);
  const GridSpec g = grid1(32);
  const PhysicalField u = to_physical(random_band(g, rng, false));
  for (double p : {1.0, 2.5, 3.0, 5.0}) {
    for (auto form : {NonlinearForm::gauge_invariant, NonlinearForm::gauge_variant}) {
      Nonlinearity nl;
      nl.lambda = Complex(-0.7, 0.2);
      nl.p = p;
      nl.form = form;
      const auto a = nonlinearity_composed(u, 1.7, 3, nl);
      const auto b = nonlinearity_power(u, 1.7, 3, nl);
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        err = std::max(err, std::abs(a.values[i] - b.values[i]));
        scale = std::max(scale, std::abs(b.values[i]));
      }
      CHECK(err <= 1e-12 * scale);
    }
  }
}

TEST_CASE("padded samples interpolate the band-limited field") {
  const double L = 4.0;
  const GridSpec g = grid1(16, L);
  const SpectralField u = to_spectral(sample(g, [&](const std::array<double, 3>& x) {
    return Complex(std::cos(2 * M_PI * 2 * x[0] / L), 0.0);
  }));
  const PhysicalField fine = to_physical_padded(u, 3);
  REQUIRE(fine.grid.points == 48);
  double err = 0.0;
  for (std::size_t i = 0; i < fine.values.size(); ++i) {
    const double x = fine.grid.coordinates(i)[0];
    err = std::max(err, std::abs(fine.values[i] - std::cos(2 * M_PI * 2 * x / L)));
  }
  CHECK(err < 1e-13);
  const SpectralField back = from_physical_padded(fine, g);
  for (std::size_t i = 0; i < u.coef.size(); ++i) CHECK(std::abs(back.coef[i] - u.coef[i]) < 1e-14);
}

TEST_CASE("snapshot round trip is bit exact") {
  std::mt19937_64 rng(9);
  GridSpec g = grid1(8, 1.25);
  g.n_dim = 3;
  const SpectralField s = random_band(g, rng, false);
  std::stringstream io;
  write_snapshot(io, s);
  const SpectralField r = read_snapshot(io);
  CHECK(r.grid == g);
  for (std::size_t i = 0; i < s.coef.size(); ++i) CHECK(r.coef[i] == s.coef[i]);

  std::stringstream bad("NOTASNAP");
  CHECK_THROWS(read_snapshot(bad));
}

TEST_CASE("grid validation") {
  GridSpec g = grid1(16);
  CHECK_NOTHROW(g.validate());
  g.points = 12;
  CHECK_THROWS_AS(g.validate(), HypothesisError);
  g.points = 4;
  CHECK_THROWS_AS(g.validate(), HypothesisError);
  g = grid1(16);
  g.n_dim = 4;
  CHECK_THROWS(g.validate());
}
