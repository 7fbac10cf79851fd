#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flrw/cosmology.hpp"
#include "flrw/extended_real.hpp"
#include "flrw/nonlinearity.hpp"
#include "flrw/quadrature.hpp"

namespace flrw {

struct SobolevOrders {
  double mu0 = 0.0;
  double mu = 0.0;
};

// Exponents of the local theory. q and q_* are carried as reciprocals so the
// endpoint q = inf is just inv_q = 0.
struct ExponentSet {
  int n = 1;
  double mu0 = 0.0;
  double mu = 0.0;
  double p = 1.0;
  double sigma = 0.0;
  double inv_q = 0.5;
  double inv_qstar = 1.0;
  double theta = 0.0;
  double delta = 1.0;
  double omega = 0.0;
  std::optional<double> gamma;  // undefined for sigma = -1 or q_* = inf
  std::optional<double> zeta;   // undefined for sigma = -1
  ExtendedReal p1;              // 1 + n(1+sigma)/(2 mu0)
  ExtendedReal p2;              // 1 + 4/(n - 2 mu0)
  ExtendedReal p_mu0;           // energy-critical cap, inf for n <= 2
  std::optional<double> p_star;
  std::optional<double> p_sharp;
  double inv_r_star = 0.5;
  double inv_r_sharp = 0.5;

  ExtendedReal q() const;
  ExtendedReal q_star() const;
  bool qstar_finite() const { return inv_qstar > 0.0; }
  double qstar() const;  // throws if infinite
};

// Default endpoint 1/q = min{1/2, 2/((p-1)(n-2 mu0))}.
double default_inv_q(int n, double mu0, double p);

// Validates the exponent hypotheses (throws HypothesisError naming each
// violated inequality) and derives everything above.
ExponentSet exponent_set(const CosmologyParams& cosmo, SobolevOrders orders, double p,
                         std::optional<double> inv_q = {});

// Closed-form family of B(T) for these parameters: 1..8, or 0 if uncovered.
int closed_form_family(const CosmologyParams& cosmo, const ExponentSet& e);
std::string describe_family(int family);

enum class BMethod { closed_form, quadrature };

struct BValue {
  ExtendedReal value;
  int family = 0;
  BMethod method = BMethod::quadrature;
};

// B(T) = || (a/a0)^{-mu0(p-1)} (2 adot/a)^{1/q_* - 1} ||_{L^{q_*}(0,T)}.
// The factor 2 on the rate is the normalisation the closed forms use.
// closed_form throws PreconditionError when the case is uncovered.
BValue b_integral(double t_end, const CosmologyParams& cosmo, const ExponentSet& e, BMethod method,
                  QuadratureTolerance tol = {});
// Same norm with the bare rate adot/a.
double b_integral_literal(double t_end, const CosmologyParams& cosmo, const ExponentSet& e,
                          QuadratureTolerance tol = {});
// A(T) = M(T)^{-delta} || a^{-mu0(p-1)} (2 adot/a)^{1/q_* - 1} ||_{L^{q_*}(0,T)}.
ExtendedReal a_weight(double t_end, const CosmologyParams& cosmo, const ExponentSet& e,
                      QuadratureTolerance tol = {});

struct RegimeConstants {
  double C = 1.0;
  double C0 = 1.0;
  double D = 0.0;
  ExtendedReal G;
  std::optional<double> B0, B1, B2, B3;
};

RegimeConstants regime_constants(const CosmologyParams& cosmo, const ExponentSet& e, double D, double C = 1.0,
                                 double C0 = 1.0);

struct CaseEvaluation {
  std::string label;
  bool hypotheses_met = false;
  bool matched = false;
  ExtendedReal t_bound;  // meaningful when matched
  std::string detail;
};

// Norms of the initial data entering the blow-up hypotheses.
struct InitialFunctionals {
  double u1_sq = 0.0;       // ||u1||^2
  double grad_u0_sq = 0.0;  // ||grad u0||^2
  double u0_sq = 0.0;       // ||u0||^2
  double u0_lp1 = 0.0;      // ||u0||_{p+1}^{p+1}
  double overlap = 0.0;     // Re int u0 conj(u1)
  double energy = 0.0;      // left side of the negative-energy condition
  double positivity = 0.0;  // a1 ||u0||^2 + a0 overlap
  std::optional<double> t_star;
};

InitialFunctionals make_functionals(double u1_sq, double grad_u0_sq, double u0_sq, double u0_lp1, double overlap,
                                    const CosmologyParams& cosmo, const Nonlinearity& nl);

struct NamedCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
};

struct BlowupSummary {
  HorizonTimes horizons;
  std::optional<double> t_star;
  std::vector<NamedCheck> checks;  // direct hypothesis suite
  bool direct_ok = false;
};

struct RegimeQuery {
  CosmologyParams cosmo;
  Nonlinearity nl;
  SobolevOrders orders;
  std::optional<double> inv_q;
  double D = 0.0;
  double C = 1.0;
  double C0 = 1.0;
};

struct MasterSolve {
  double t = 0.0;
  double upper = 0.0;
  bool saturated = false;
  int iterations = 0;
};

struct RegimeReport {
  std::string kind;
  std::optional<ExponentSet> exponents;
  std::optional<RegimeConstants> constants;
  HorizonTimes horizons;
  std::vector<CaseEvaluation> cases;
  std::string matched_case = "none";
  ExtendedReal admissible_t;
  bool certified = false;
  std::optional<MasterSolve> master;
  std::optional<double> sup_a;
  std::optional<BlowupSummary> blowup;
  std::vector<std::string> notes;

  std::vector<std::string> matched_labels() const;
};

// Bisection for the largest T in [0, min(T1, T_cap)] with B(T) <= G M(T)^delta.
MasterSolve solve_master(const CosmologyParams& cosmo, const ExponentSet& e, const RegimeConstants& k);
bool master_holds(double t, const CosmologyParams& cosmo, const ExponentSet& e, const RegimeConstants& k,
                  BMethod method = BMethod::closed_form, double rel_slack = 1e-12);
double bisection_cap(const CosmologyParams& cosmo);

RegimeReport classify_local(const RegimeQuery& q);
RegimeReport classify_global(const RegimeQuery& q);
RegimeReport classify_blowup(const CosmologyParams& cosmo, const Nonlinearity& nl, const InitialFunctionals& f,
                             int samples = 512);

}  // namespace flrw
