#pragma once

#include <memory>
#include <vector>

#include "flrw/cosmology.hpp"

namespace flrw {

// What the PDE machinery needs from the expanding background. The closed-form
// family is the validated path; the tabulated variant is a hook for scale
// factors outside the family and is not checked against the analytic bounds.
class Background {
 public:
  Background(const CosmologyParams& p);  // NOLINT: implicit on purpose

  // a(t) sampled on a uniform grid t_i = i*dt, M^2 built from
  //   M^2 = m^2 - n(n-2)/(4c^2) (adot/a)^2 - n/(2c^2) addot/a.
  static Background tabulated(int n, double c, double mass, double dt, std::vector<double> a_samples);

  const CosmologyParams& params() const { return params_; }
  bool is_tabulated() const { return static_cast<bool>(table_); }
  int n() const { return params_.n; }
  double c() const { return params_.c; }
  double a0() const { return params_.a0; }

  double life_span() const;
  // Largest time at which M^2 is still positive (T1 for the family).
  double mass_horizon() const;

  ScaleDerivatives scale(double t) const;
  double a(double t) const { return scale(t).a; }
  double mass_sq(double t) const;
  double mass_mass_dot(double t) const;

 private:
  struct Table;
  CosmologyParams params_;
  std::shared_ptr<const Table> table_;
};

}  // namespace flrw
