#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flrw/extended_real.hpp"

namespace flrw {

// Power-law / de Sitter family
//   a(t) = a0 (1 + n(1+sigma) H t / 2)^{2/(n(1+sigma))},  sigma != -1
//   a(t) = a0 exp(H t),                                   sigma == -1
struct CosmologyParams {
  int n = 1;
  double hubble = 0.0;
  double sigma = 0.0;
  double c = 1.0;
  double mass = 0.0;
  double a0 = 1.0;

  // Throws HypothesisError listing every bad field.
  void validate() const;
  bool is_de_sitter() const { return sigma == -1.0; }
  // 1 + n(1+sigma) H t / 2; identically 1 in the de Sitter case.
  double base(double t) const;
  double life_span() const;  // T0 as IEEE double (+inf if unbounded)
  double nh_over_2c() const { return n * hubble / (2.0 * c); }
};

struct ScaleDerivatives {
  double a = 0.0;
  double a_dot = 0.0;
  double a_ddot = 0.0;
  double rate = 0.0;      // adot / a
  double rate_dot = 0.0;  // d/dt (adot / a)
};

double scale_factor(double t, const CosmologyParams& p);
ScaleDerivatives scale_derivatives(double t, const CosmologyParams& p);

// M^2 and M Mdot in closed form. Valid on [0, T0).
double curved_mass_sq(double t, const CosmologyParams& p);
double mass_mass_dot(double t, const CosmologyParams& p);

// M(t) where M^2 may be negative; the imaginary branch is tagged, never a NaN.
class CurvedMass {
 public:
  explicit CurvedMass(double squared) : squared_(squared) {}
  double squared() const { return squared_; }
  bool is_real() const { return squared_ >= 0.0; }
  double real() const;                 // throws DomainError if imaginary
  double imaginary_magnitude() const;  // throws DomainError if real

 private:
  double squared_;
};

CurvedMass curved_mass(double t, const CosmologyParams& p);

struct UndefinedTime {
  std::string reason;
  double offending = 0.0;
};

struct HorizonTimes {
  ExtendedReal t0;
  ExtendedReal t1;
  std::variant<ExtendedReal, UndefinedTime> t2;

  bool t2_defined() const { return std::holds_alternative<ExtendedReal>(t2); }
  const ExtendedReal& t2_value() const;  // throws PreconditionError if undefined
};

// T2 needs the nonlinear power p; without it T2 is reported undefined.
HorizonTimes horizon_times(const CosmologyParams& p, std::optional<double> power = {});

struct SignViolation {
  double t = 0.0;
  std::string what;
  double value = 0.0;
};

struct MassSignReport {
  double window_end = 0.0;
  std::vector<double> t;
  std::vector<double> mass_sq;
  std::vector<double> mass_mass_dot;
  int predicted_sign = 0;                // sign of M Mdot from the closed form
  std::optional<bool> nonincreasing;     // H >= 0 table; empty when H < 0
  std::vector<SignViolation> violations;

  bool ok() const { return violations.empty(); }
};

// Samples [0, min(T1, horizon_cap)) and cross-checks the sign of M Mdot against
// the analytic case table.
MassSignReport mass_sign_profile(const CosmologyParams& p, int samples, double horizon_cap = 50.0);

}  // namespace flrw
