#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flrw/background.hpp"
#include "flrw/spectral.hpp"

namespace flrw {

// alpha(t, k) = c^2 |k|^2 / a^2 + c^2 M^2 and its time derivative.
double alpha(double t, double k_sq, const Background& bg);
double alpha_dot(double t, double k_sq, const Background& bg);

inline double japanese(double k_sq) { return std::sqrt(1.0 + k_sq); }

struct ModeKernel {
  double k_sq = 0.0;
  double alpha0 = 0.0;
  std::vector<double> t;
  std::vector<double> alpha;
  std::vector<double> rho0, drho0, rho1, drho1;
  double max_wronskian_dev = 0.0;

  double wronskian(std::size_t i) const { return rho0[i] * drho1[i] - rho1[i] * drho0[i]; }
};

// RK4 on rho'' + alpha rho = 0 for both fundamental solutions. T is split into
// round(T/dt) equal steps. Throws NumericalError if the Wronskian drifts by
// more than 1e-6.
ModeKernel solve_mode(double k_sq, double t_end, const Background& bg, double dt);

struct EnvelopeConstants {
  std::vector<double> t;
  std::vector<double> eta;
  double n1 = 0.0, n2 = 0.0, n3 = 0.0, n4 = 0.0;
  double m0 = 0.0;
  double m_star = 0.0;
  double a0 = 1.0;
  double c = 1.0;

  // eta at an arbitrary t by linear interpolation of the grid (eta is monotone).
  double eta_at(double t) const;
};

// Needs M > 0, adot >= 0 and Mdot <= 0 on [0, T]; checks the <k> bracket on
// sqrt(alpha(0, k)) at a spread of |k|. Throws PreconditionError otherwise.
EnvelopeConstants envelope_constants(double t_end, const Background& bg, double dt);

struct BoundViolation {
  double t = 0.0;
  double k_sq = 0.0;
  std::string which;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct BoundReport {
  std::size_t checked = 0;
  double worst_margin = 0.0;  // max over checks of lhs / (rhs (1 + slack))
  std::vector<BoundViolation> violations;
  std::vector<std::string> notes;

  bool ok() const { return violations.empty(); }
  void merge(const BoundReport& o);
};

// Per-mode bounds |rho0| <= min{eta, N1<k>}, |rho0'| <= c N2 <k>,
// |rho1| <= min{N3 eta/<k>, N4}/c, |rho1'| <= 1, plus the raw alpha bounds.
BoundReport verify_mode_bounds(const ModeKernel& mode, const EnvelopeConstants& env, const Background& bg,
                               double slack = 1e-6);

// Per-frequency kernel values on the uniform grid t_i = i dt. Modes sharing
// |k|^2 share one solve; rows are appended on demand.
class KernelTable {
 public:
  KernelTable(const GridSpec& g, Background bg, double dt);

  const GridSpec& grid() const { return grid_; }
  const Background& background() const { return bg_; }
  double dt() const { return dt_; }
  double time(std::size_t i) const { return static_cast<double>(i) * dt_; }
  // Rows 0..steps() are available.
  std::size_t steps() const { return rows_ - 1; }
  void ensure(std::size_t steps);

  std::size_t classes() const { return class_k_sq_.size(); }
  double class_k_sq(std::size_t c) const { return class_k_sq_[c]; }
  std::size_t class_of(std::size_t flat) const { return mode_class_[flat]; }

  struct Values {
    double rho0, drho0, rho1, drho1;
  };
  Values at(std::size_t cls, std::size_t step) const;
  // Grid index of t if it sits on the grid (to 1e-9 dt), else empty.
  std::optional<std::size_t> index_of(double t) const;
  double max_wronskian_dev() const { return max_wronskian_dev_; }

 private:
  double alpha_at(std::size_t cls, double inv_a2, double m2) const;

  GridSpec grid_;
  Background bg_;
  double dt_;
  std::vector<double> class_k_sq_;
  std::vector<std::size_t> mode_class_;
  std::size_t rows_ = 0;
  std::vector<double> data_;  // rows_ x classes x 4
  double max_wronskian_dev_ = 0.0;
};

enum class KernelOp { k0, k1, k2, dk0, dk1, dk2 };
std::string to_string(KernelOp op);

// K2 and dK2 use both t and s; the others ignore s. Both times must be grid
// times already held by the table; nothing is interpolated.
SpectralField apply_kernel(KernelOp op, const SpectralField& phi, const KernelTable& table, double t, double s = 0.0);

// Operator inequalities op.1-op.9 for K0, K1, K2 on `fields` random fields at
// every pair from `times` (grid times). Norms use <k>^{+-1} weights.
BoundReport check_operator_bounds(const KernelTable& table, const EnvelopeConstants& env,
                                  const std::vector<double>& times, int fields, std::uint64_t seed,
                                  double slack = 1e-6);

}  // namespace flrw
