#pragma once

#include <complex>
#include <string>

namespace flrw {

enum class NonlinearForm {
  gauge_invariant,  // f(u) = lambda |u|^{p-1} u
  gauge_variant,    // f(u) = lambda |u|^p   (real data only for the ledger)
};

std::string to_string(NonlinearForm f);
NonlinearForm parse_nonlinear_form(const std::string& s);

// Power nonlinearity plus the blow-up exponents kappa, kappa_*.
struct Nonlinearity {
  std::complex<double> lambda{0.0, 0.0};
  double p = 3.0;
  NonlinearForm form = NonlinearForm::gauge_invariant;
  double kappa = 4.0;
  double kappa_star = 0.25;

  void validate() const;
  bool is_linear() const { return lambda == std::complex<double>(0.0, 0.0); }
  bool real_lambda() const { return lambda.imag() == 0.0; }
  // True when f is a polynomial in (u, conj u), which allows mu >= p.
  bool is_polynomial() const;

  std::complex<double> f(std::complex<double> u) const;
  // Potential density V with d/dt V(u) = 2 Re(conj(u_t) f(u)).
  double potential(std::complex<double> u) const;
  // Spatial volume exponent n(p-1)/2 that scales h against f.
  double scaling_exponent(int n) const { return n * (p - 1.0) / 2.0; }
};

}  // namespace flrw
