#include "flrw/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <tuple>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// FFTW plans are created once per shape and executed on caller arrays through
// the new-array interface. Planning is not thread safe, execution is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int rank, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rank, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second.get();
    std::vector<int> dims(rank, n);
    std::size_t total = 1;
    for (int i = 0; i < rank; ++i) total *= static_cast<std::size_t>(n);
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(rank, dims.data(), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw NumericalError("FFTW failed to create a plan");
    plans_.emplace(key, PlanPtr(plan));
    return plan;
  }

 private:
  struct PlanDeleter {
    void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
  };
  using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, PlanPtr> plans_;
};

void run_fft(int rank, int n, int sign, const std::vector<Complex>& in, std::vector<Complex>& out) {
  fftw_plan plan = PlanCache::instance().get(rank, n, sign);
  out.resize(in.size());
  // FFTW does not write to the input of an out-of-place complex transform.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, src, dst);
}

std::size_t flat_index(const std::array<int, 3>& idx, int n_dim, int n) {
  std::size_t f = 0;
  for (int d = 0; d < n_dim; ++d) f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[d]);
  return f;
}

int wrap(int j, int n) { return j >= 0 ? j : j + n; }

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw PreconditionError("fields live on different grids");
}

GridSpec refined(const GridSpec& g, int pad) {
  GridSpec f = g;
  f.points = g.points * pad;
  return f;
}

}  // namespace

void GridSpec::validate() const {
  std::vector<std::string> v;
  if (n_dim < 1 || n_dim > 3) v.push_back("grid n_dim must be 1, 2 or 3");
  if (points < 8 || (points & (points - 1)) != 0) v.push_back("grid points must be a power of two >= 8");
  if (!(length > 0.0) || !std::isfinite(length)) v.push_back("grid length must be positive");
  if (!v.empty()) throw HypothesisError(std::move(v));
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int d = 0; d < n_dim; ++d) s *= static_cast<std::size_t>(points);
  return s;
}

double GridSpec::volume() const { return std::pow(length, n_dim); }
double GridSpec::cell_volume() const { return volume() / static_cast<double>(size()); }

std::array<int, 3> GridSpec::lattice(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = n_dim - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % static_cast<std::size_t>(points));
    flat /= static_cast<std::size_t>(points);
  }
  return idx;
}

std::array<double, 3> GridSpec::coordinates(std::size_t flat) const {
  const auto idx = lattice(flat);
  const double h = length / points;
  return {idx[0] * h, idx[1] * h, idx[2] * h};
}

double GridSpec::k_sq(std::size_t flat) const {
  const auto idx = lattice(flat);
  double s = 0.0;
  for (int d = 0; d < n_dim; ++d) {
    const double k = kTwoPi * signed_index(idx[d]) / length;
    s += k * k;
  }
  return s;
}

std::vector<double> GridSpec::k_sq_table() const {
  std::vector<double> t(size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = k_sq(i);
  return t;
}

bool GridSpec::in_band(std::size_t flat) const {
  const auto idx = lattice(flat);
  const int cut = dealias_cutoff();
  for (int d = 0; d < n_dim; ++d) {
    if (std::abs(signed_index(idx[d])) > cut) return false;
  }
  return true;
}

double GridSpec::k_max() const { return kTwoPi * (points / 2) / length * std::sqrt(static_cast<double>(n_dim)); }

bool PhysicalField::is_real(double tol) const {
  double scale = 0.0;
  double imag = 0.0;
  for (const auto& v : values) {
    scale = std::max(scale, std::abs(v));
    imag = std::max(imag, std::abs(v.imag()));
  }
  return imag <= tol * std::max(scale, 1e-300);
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(grid, o.grid);
  for (std::size_t i = 0; i < coef.size(); ++i) coef[i] += o.coef[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(grid, o.grid);
  for (std::size_t i = 0; i < coef.size(); ++i) coef[i] -= o.coef[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coef) c *= s;
  return *this;
}

bool SpectralField::finite() const {
  return std::all_of(coef.begin(), coef.end(),
                     [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

void add_scaled(SpectralField& y, double s, const SpectralField& x) {
  require_same_grid(y.grid, x.grid);
  for (std::size_t i = 0; i < y.coef.size(); ++i) y.coef[i] += s * x.coef[i];
}

SpectralField to_spectral(const PhysicalField& u) {
  SpectralField out(u.grid);
  run_fft(u.grid.n_dim, u.grid.points, FFTW_FORWARD, u.values, out.coef);
  const double inv = 1.0 / static_cast<double>(u.grid.size());
  for (auto& c : out.coef) c *= inv;
  return out;
}

PhysicalField to_physical(const SpectralField& u) {
  PhysicalField out(u.grid);
  run_fft(u.grid.n_dim, u.grid.points, FFTW_BACKWARD, u.coef, out.values);
  return out;
}

PhysicalField to_physical_padded(const SpectralField& u, int pad) {
  if (pad == 1) return to_physical(u);
  if (pad < 1) throw PreconditionError("pad factor must be >= 1");
  const GridSpec fine = refined(u.grid, pad);
  SpectralField big(fine);
  for (std::size_t i = 0; i < u.coef.size(); ++i) {
    auto idx = u.grid.lattice(i);
    for (int d = 0; d < u.grid.n_dim; ++d) idx[d] = wrap(u.grid.signed_index(idx[d]), fine.points);
    big.coef[flat_index(idx, u.grid.n_dim, fine.points)] = u.coef[i];
  }
  return to_physical(big);
}

SpectralField from_physical_padded(const PhysicalField& fine, const GridSpec& coarse) {
  if (fine.grid == coarse) return to_spectral(fine);
  const SpectralField big = to_spectral(fine);
  SpectralField out(coarse);
  for (std::size_t i = 0; i < out.coef.size(); ++i) {
    auto idx = coarse.lattice(i);
    for (int d = 0; d < coarse.n_dim; ++d) idx[d] = wrap(coarse.signed_index(idx[d]), fine.grid.points);
    out.coef[i] = big.coef[flat_index(idx, coarse.n_dim, fine.grid.points)];
  }
  return out;
}

PhysicalField sample(const GridSpec& g, const std::function<Complex(const std::array<double, 3>&)>& fn) {
  g.validate();
  PhysicalField out(g);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = fn(g.coordinates(i));
  return out;
}

double sobolev_norm(const SpectralField& u, double mu, bool homogeneous) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.coef.size(); ++i) {
    const double k2 = u.grid.k_sq(i);
    double w = 1.0;
    if (mu != 0.0) {
      if (homogeneous) {
        w = k2 > 0.0 ? std::pow(k2, mu) : 0.0;
      } else {
        w = std::pow(1.0 + k2, mu);
      }
    }
    s += w * std::norm(u.coef[i]);
  }
  return std::sqrt(s * u.grid.volume());
}

double l2_norm(const SpectralField& u) {
  double s = 0.0;
  for (const auto& c : u.coef) s += std::norm(c);
  return std::sqrt(s * u.grid.volume());
}

double gradient_norm(const SpectralField& u) { return sobolev_norm(u, 1.0, true); }

double inner_real(const SpectralField& u, const SpectralField& v) {
  require_same_grid(u.grid, v.grid);
  double s = 0.0;
  for (std::size_t i = 0; i < u.coef.size(); ++i) s += (u.coef[i] * std::conj(v.coef[i])).real();
  return s * u.grid.volume();
}

double lebesgue_norm(const PhysicalField& u, double r) {
  if (!(r >= 1.0)) throw PreconditionError("Lebesgue exponent must be >= 1");
  if (std::isinf(r)) {
    double m = 0.0;
    for (const auto& v : u.values) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (const auto& v : u.values) s += std::pow(std::abs(v), r);
  return std::pow(s * u.grid.cell_volume(), 1.0 / r);
}

double lebesgue_norm(const SpectralField& u, double r, int pad) {
  return lebesgue_norm(to_physical_padded(u, pad), r);
}

void dealias(SpectralField& u) {
  for (std::size_t i = 0; i < u.coef.size(); ++i) {
    if (!u.grid.in_band(i)) u.coef[i] = 0.0;
  }
}

double spectral_tail_fraction(const SpectralField& u) {
  double total = 0.0;
  double tail = 0.0;
  const int q = u.grid.points / 4;
  for (std::size_t i = 0; i < u.coef.size(); ++i) {
    const double e = std::norm(u.coef[i]);
    total += e;
    const auto idx = u.grid.lattice(i);
    for (int d = 0; d < u.grid.n_dim; ++d) {
      if (std::abs(u.grid.signed_index(idx[d])) >= q) {
        tail += e;
        break;
      }
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

NonlinearTerm::NonlinearTerm(const GridSpec& g, Nonlinearity nl, int pad) : grid_(g), nl_(nl), pad_(pad) {
  g.validate();
  nl_.validate();
  if (pad < 1) throw PreconditionError("pad factor must be >= 1");
}

SpectralField NonlinearTerm::operator()(const SpectralField& u, double a) const {
  require_same_grid(u.grid, grid_);
  if (nl_.is_linear()) return SpectralField(grid_);
  PhysicalField x = to_physical_padded(u, pad_);
  const double w = std::pow(a, -nl_.scaling_exponent(grid_.n_dim));
  for (auto& v : x.values) v = w * nl_.f(v);
  SpectralField h = from_physical_padded(x, grid_);
  dealias(h);
  return h;
}

double NonlinearTerm::potential_integral(const SpectralField& u, double a) const {
  require_same_grid(u.grid, grid_);
  if (nl_.is_linear()) return 0.0;
  const PhysicalField x = to_physical_padded(u, pad_);
  double s = 0.0;
  for (const auto& v : x.values) s += nl_.potential(v);
  return std::pow(a, -nl_.scaling_exponent(grid_.n_dim)) * s * x.grid.cell_volume();
}

double NonlinearTerm::work_density(const SpectralField& u, double a) const {
  require_same_grid(u.grid, grid_);
  if (nl_.is_linear()) return 0.0;
  const PhysicalField x = to_physical_padded(u, pad_);
  const double w = std::pow(a, -nl_.scaling_exponent(grid_.n_dim));
  double s = 0.0;
  for (const auto& v : x.values) s += (std::conj(v) * nl_.f(v)).real();
  return w * s * x.grid.cell_volume();
}

PhysicalField nonlinearity_composed(const PhysicalField& u, double a, int n, const Nonlinearity& nl) {
  PhysicalField out(u.grid);
  const double up = std::pow(a, n / 2.0);
  const double down = std::pow(a, -n / 2.0);
  for (std::size_t i = 0; i < u.values.size(); ++i) out.values[i] = up * nl.f(down * u.values[i]);
  return out;
}

PhysicalField nonlinearity_power(const PhysicalField& u, double a, int n, const Nonlinearity& nl) {
  PhysicalField out(u.grid);
  const double w = std::pow(a, -nl.scaling_exponent(n));
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const Complex v = u.values[i];
    const double r = std::abs(v);
    if (nl.form == NonlinearForm::gauge_invariant) {
      out.values[i] = w * nl.lambda * std::pow(r, nl.p - 1.0) * v;
    } else {
      out.values[i] = w * nl.lambda * std::pow(r, nl.p);
    }
  }
  return out;
}

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError({"truncated snapshot"});
  return v;
}

constexpr char kMagic[8] = {'F', 'L', 'R', 'W', 'S', 'N', 'P', '1'};

}  // namespace

void write_snapshot(std::ostream& os, const SpectralField& u) {
  os.write(kMagic, sizeof kMagic);
  put<std::int32_t>(os, u.grid.n_dim);
  put<std::int32_t>(os, u.grid.points);
  put<double>(os, u.grid.length);
  put<std::uint64_t>(os, u.coef.size());
  // TODO: the index column is redundant for dense fields; drop it in a v2 format.
  for (std::size_t i = 0; i < u.coef.size(); ++i) {
    put<std::int64_t>(os, static_cast<std::int64_t>(i));
    put<double>(os, u.coef[i].real());
    put<double>(os, u.coef[i].imag());
  }
}

SpectralField read_snapshot(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ConfigError({"not a field snapshot"});
  }
  GridSpec g;
  g.n_dim = get<std::int32_t>(is);
  g.points = get<std::int32_t>(is);
  g.length = get<double>(is);
  g.validate();
  const auto count = get<std::uint64_t>(is);
  SpectralField u(g);
  for (std::uint64_t c = 0; c < count; ++c) {
    const auto idx = get<std::int64_t>(is);
    const double re = get<double>(is);
    const double im = get<double>(is);
    if (idx < 0 || static_cast<std::size_t>(idx) >= u.coef.size()) throw ConfigError({"snapshot index out of range"});
    u.coef[static_cast<std::size_t>(idx)] = {re, im};
  }
  return u;
}

void write_csv(std::ostream& os, const PhysicalField& u) {
  os << "index,x0,x1,x2,re,im\n";
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const auto x = u.grid.coordinates(i);
    os << i << ',' << format_double(x[0]) << ',' << format_double(x[1]) << ',' << format_double(x[2]) << ','
       << format_double(u.values[i].real()) << ',' << format_double(u.values[i].imag()) << '\n';
  }
}

}  // namespace flrw
