#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "flrw/nonlinearity.hpp"

namespace flrw {

using Complex = std::complex<double>;

// Periodic box [0, L)^n with N points per axis. Frequencies k = 2 pi j / L with
// j in {-N/2, ..., N/2 - 1}, stored in FFT order (0, 1, ..., N/2-1, -N/2, ..., -1).
struct GridSpec {
  int n_dim = 1;
  int points = 256;
  double length = 20.0 * 3.14159265358979323846;

  void validate() const;
  std::size_t size() const;
  double volume() const;
  double cell_volume() const;
  // Signed lattice index of FFT position i on one axis.
  int signed_index(int i) const { return i < points / 2 ? i : i - points; }
  std::array<int, 3> lattice(std::size_t flat) const;
  std::array<double, 3> coordinates(std::size_t flat) const;
  double k_sq(std::size_t flat) const;
  std::vector<double> k_sq_table() const;
  // Largest per-axis |j| kept by the 2/3 rule.
  int dealias_cutoff() const { return points / 3; }
  bool in_band(std::size_t flat) const;
  double k_max() const;

  bool operator==(const GridSpec&) const = default;
};

struct PhysicalField {
  GridSpec grid;
  std::vector<Complex> values;

  PhysicalField() = default;
  explicit PhysicalField(const GridSpec& g) : grid(g), values(g.size()) {}
  bool is_real(double tol = 1e-12) const;
};

// Coefficients normalised so u(x) = sum_k c_k e^{ikx}; then ||u||_2^2 = V sum |c_k|^2.
struct SpectralField {
  GridSpec grid;
  std::vector<Complex> coef;

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g) : grid(g), coef(g.size()) {}

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  bool finite() const;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// (u, u_t) at time t on one grid.
struct FieldState {
  double t = 0.0;
  SpectralField u;
  SpectralField ut;
};

// axpy: y += s x
void add_scaled(SpectralField& y, double s, const SpectralField& x);

SpectralField to_spectral(const PhysicalField& u);
PhysicalField to_physical(const SpectralField& u);

// Evaluate on a grid refined by `pad` per axis (spectral interpolation).
PhysicalField to_physical_padded(const SpectralField& u, int pad);
// Inverse of the above, dropping coefficients outside the coarse lattice.
SpectralField from_physical_padded(const PhysicalField& fine, const GridSpec& coarse);

PhysicalField sample(const GridSpec& g, const std::function<Complex(const std::array<double, 3>&)>& fn);

// Homogeneous weight |k|^{2 mu} (k = 0 weighted 0 unless mu = 0) or <k>^{2 mu}.
double sobolev_norm(const SpectralField& u, double mu, bool homogeneous);
double l2_norm(const SpectralField& u);
double gradient_norm(const SpectralField& u);
// Re int u conj(v)
double inner_real(const SpectralField& u, const SpectralField& v);

// Collocation norm; r = inf (HUGE_VAL) is the max. pad > 1 samples the
// interpolant on a refined grid.
double lebesgue_norm(const SpectralField& u, double r, int pad = 1);
double lebesgue_norm(const PhysicalField& u, double r);

// 2/3 rule in place: coefficients with some |j_axis| > N/3 are zeroed.
void dealias(SpectralField& u);
// Energy fraction in the top octave (any |j_axis| >= N/4).
double spectral_tail_fraction(const SpectralField& u);

// h(u) = lambda a^{-n(p-1)/2} |u|^{p-1} u (or |u|^p), evaluated on a grid
// padded by `pad` and truncated with the 2/3 rule.
class NonlinearTerm {
 public:
  NonlinearTerm(const GridSpec& g, Nonlinearity nl, int pad = 2);

  const Nonlinearity& nonlinearity() const { return nl_; }
  int pad() const { return pad_; }
  SpectralField operator()(const SpectralField& u, double a) const;
  // a^{-n(p-1)/2} int V(u) dx, collocated on the padded grid.
  double potential_integral(const SpectralField& u, double a) const;
  // Re int conj(u) h dx on the padded grid.
  double work_density(const SpectralField& u, double a) const;

 private:
  GridSpec grid_;
  Nonlinearity nl_;
  int pad_;
};

// h through the unsimplified composition a^{n/2} f(a^{-n/2} u), pointwise.
PhysicalField nonlinearity_composed(const PhysicalField& u, double a, int n, const Nonlinearity& nl);
PhysicalField nonlinearity_power(const PhysicalField& u, double a, int n, const Nonlinearity& nl);

// Columnar binary snapshot: header "FLRWSNP1", int32 n_dim, int32 N, f64 L,
// u64 count, then count x (i64 flat index, f64 re, f64 im); little-endian.
void write_snapshot(std::ostream& os, const SpectralField& u);
SpectralField read_snapshot(std::istream& is);
void write_csv(std::ostream& os, const PhysicalField& u);

}  // namespace flrw
