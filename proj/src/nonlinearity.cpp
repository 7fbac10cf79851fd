#include "flrw/nonlinearity.hpp"

#include <cmath>
#include <vector>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw {

std::string to_string(NonlinearForm f) {
  return f == NonlinearForm::gauge_invariant ? "gauge_invariant" : "gauge_variant";
}

NonlinearForm parse_nonlinear_form(const std::string& s) {
  if (s == "gauge_invariant") return NonlinearForm::gauge_invariant;
  if (s == "gauge_variant") return NonlinearForm::gauge_variant;
  throw DomainError("unknown nonlinearity form '" + s + "' (gauge_invariant | gauge_variant)");
}

void Nonlinearity::validate() const {
  std::vector<std::string> bad;
  if (!(p >= 1.0) || !std::isfinite(p)) bad.push_back("p >= 1 required (got " + format_double(p) + ")");
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) bad.push_back("lambda finite");
  if (!std::isfinite(kappa)) bad.push_back("kappa finite");
  if (!std::isfinite(kappa_star)) bad.push_back("kappa_star finite");
  if (!bad.empty()) throw HypothesisError(std::move(bad));
}

bool Nonlinearity::is_polynomial() const {
  const double r = std::round(p);
  if (std::abs(p - r) > 0.0) return false;
  const long k = static_cast<long>(r);
  return form == NonlinearForm::gauge_invariant ? (k % 2 == 1) : (k % 2 == 0);
}

std::complex<double> Nonlinearity::f(std::complex<double> u) const {
  const double m = std::abs(u);
  if (form == NonlinearForm::gauge_invariant) {
    if (m == 0.0) return 0.0;
    return lambda * std::pow(m, p - 1.0) * u;
  }
  return lambda * std::pow(m, p);
}

double Nonlinearity::potential(std::complex<double> u) const {
  const double m = std::abs(u);
  if (form == NonlinearForm::gauge_invariant) return 2.0 * lambda.real() * std::pow(m, p + 1.0) / (p + 1.0);
  // Real data: V = 2 lambda |u|^p u / (p + 1).
  return 2.0 * lambda.real() * std::pow(m, p) * u.real() / (p + 1.0);
}

}  // namespace flrw
