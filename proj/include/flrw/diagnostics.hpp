#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flrw/background.hpp"
#include "flrw/quadrature.hpp"
#include "flrw/regimes.hpp"
#include "flrw/solver.hpp"
#include "flrw/spectral.hpp"

namespace flrw {

enum class LedgerMode {
  linear,     // h kept as a forcing term: work integral 2 Re int int conj(u_t) h
  nonlinear,  // h absorbed into the potential a^{-n(p-1)/2} int V(u)
};
std::string to_string(LedgerMode m);

struct LedgerRow {
  double t = 0.0;
  double kinetic = 0.0;          // c^-2 ||u_t||^2
  double gradient = 0.0;         // a^-2 ||grad u||^2
  double mass = 0.0;             // M^2 ||u||^2
  double potential = 0.0;        // a^{-n(p-1)/2} int V(u)      (nonlinear mode)
  double mass_dissipation = 0.0; // -2 int M Mdot ||u||^2
  double grad_dissipation = 0.0; // 2 int a^-3 adot ||grad u||^2
  double work = 0.0;             // 2 Re int int conj(u_t) h     (linear mode)
  double potential_dissipation = 0.0;  // n(p-1)/2 int adot a^{-n(p-1)/2-1} int V
  double flux = 0.0;             // int sum_j d_j e^j, zero on the torus
  double total = 0.0;
};

struct EnergyLedger {
  LedgerMode mode = LedgerMode::linear;
  TimeRule rule = TimeRule::trapezoid;
  std::vector<LedgerRow> rows;
  double scale = 0.0;      // sum of |components| at t = 0
  double max_drift = 0.0;  // max |total - total(0)| / scale
  double max_flux = 0.0;

  static std::vector<std::string> columns();
};

// Consumes states one step at a time (use as a StepObserver) so the time
// integrals run at the step size rather than the output stride.
class LedgerAccumulator {
 public:
  LedgerAccumulator(const Background& bg, const Nonlinearity& nl, const GridSpec& grid, LedgerMode mode,
                    TimeRule rule = TimeRule::trapezoid, int pad = 2);

  void observe(const FieldState& s);
  StepObserver observer() {
    return [this](const FieldState& s) { observe(s); };
  }
  // Rows at every `stride`-th observed state (and the last).
  EnergyLedger finish(int stride = 1) const;
  std::size_t samples() const { return t_.size(); }

 private:
  Background bg_;
  Nonlinearity nl_;
  NonlinearTerm h_;
  LedgerMode mode_;
  TimeRule rule_;
  std::vector<double> k2_;
  std::vector<double> t_;
  std::vector<LedgerRow> inst_;  // instantaneous parts only
  std::vector<double> f_mass_, f_grad_, f_work_, f_pot_;
};

// Ledger over the stored states of a trajectory.
EnergyLedger energy_ledger(const Trajectory& traj, const Background& bg, const Nonlinearity& nl, LedgerMode mode,
                           TimeRule rule = TimeRule::trapezoid, int pad = 2);

struct XnormComponents {
  double nu = 0.0;
  double ut_sup = 0.0;        // c^-1 sup ||u_t||_{H^nu dot}
  double grad_sup = 0.0;      // sup ||a^-1 grad u||
  double mass_sup = 0.0;      // sup ||M u||
  double grad_l2 = 0.0;       // ||sqrt(adot a^-3) grad u||_{L2 L2}
  double mass_l2 = 0.0;       // ||sqrt(-Mdot M) u||_{L2 L2}
  double norm() const;
};

struct XnormReport {
  std::vector<XnormComponents> components;
  double data_size = 0.0;      // c^-1||u1|| + a0^-1||grad u0|| + M0||u0||
  double forcing_l1l2 = 0.0;   // int ||h||_2 dt over the stored grid
};

// Refuses (PreconditionError) unless adot >= 0, M^2 >= 0 and Mdot <= 0 at each stored time.
XnormReport xnorm_report(const Trajectory& traj, const Background& bg, const Nonlinearity& nl,
                         const std::vector<double>& nu_list, int pad = 2);

struct VirialReport {
  std::vector<double> t;
  std::vector<double> residual;  // |d^2/dt^2 ||u||^2 - rhs| / scale
  double max_residual = 0.0;
};

// Central differences over the stored states (uniform spacing required).
VirialReport virial_check(const Trajectory& traj, const Background& bg, const Nonlinearity& nl, int pad = 2);

// D_mu0 = c^-1 ||u1||_{H^mu0 dot} + a0^-1 ||grad u0||_{H^mu0 dot} + M0 ||u0||_{H^mu0 dot}.
double data_size(const FieldState& data, const Background& bg, double mu0);

InitialFunctionals initial_data_functionals(const FieldState& data, const Background& bg, const Nonlinearity& nl,
                                            int pad = 2);

struct BlowupSettings {
  double growth_factor = 1e3;   // detection when ||u|| >= growth_factor ||u0||
  double t_star_slack = 0.1;    // detected time <= (1 + slack) T*
  double claim_tol = 1e-8;      // gdot >= -claim_tol max|gdot|
  double envelope_tol = 1e-10;  // G <= G(0) + Gdot(0) t + envelope_tol G(0)
};

struct BlowupTrace {
  std::vector<double> t, g, g_dot, G, G_dot, norm;
  double kappa_star = 0.0;
  double gamma_blow = 0.0;
  std::optional<double> predicted_t_star;
  std::optional<double> detected_time;
  double min_gdot_ratio = 0.0;  // min gdot / max |gdot|
  bool claim_ok = false;
  bool envelope_ok = false;
  bool detected_in_time = false;
  std::string detail;

  bool ok() const { return claim_ok && envelope_ok && detected_in_time; }
};

class BlowupAccumulator {
 public:
  BlowupAccumulator(const Background& bg, const Nonlinearity& nl, const RegimeReport& certification,
                    BlowupSettings settings = {});

  void observe(const FieldState& s);
  StepObserver observer() {
    return [this](const FieldState& s) { observe(s); };
  }
  // Non-finite stops in the trajectory count as detection at their last finite time.
  BlowupTrace finish(const Trajectory& traj) const;

 private:
  Background bg_;
  Nonlinearity nl_;
  BlowupSettings settings_;
  std::optional<double> t_star_;
  BlowupTrace trace_;
  double norm0_ = 0.0;
};

// Refuses unless `certification` is a blow-up report with its checks run.
BlowupTrace blowup_monitor(const Trajectory& traj, const Background& bg, const Nonlinearity& nl,
                           const RegimeReport& certification, BlowupSettings settings = {});

}  // namespace flrw
