#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flrw/background.hpp"
#include "flrw/kernels.hpp"
#include "flrw/nonlinearity.hpp"
#include "flrw/spectral.hpp"

namespace flrw {

enum class Scheme { duhamel, mol, both };
std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct SolverConfig {
  double dt = 1e-3;
  int slab_steps = 64;  // Duhamel slab length in steps
  double picard_tol = 1e-12;
  int picard_max = 60;
  Scheme scheme = Scheme::mol;
  int output_stride = 16;
  int pad = 2;  // nonlinear evaluation grid refinement
  // Runs stop at this fraction of a finite horizon T0.
  double horizon_fraction = 0.95;

  // Adaptive MoL: dt_n = min(dt, cfl / omega_nl) with omega_nl the local
  // nonlinear frequency; used by the blow-up runs.
  bool adaptive = false;
  double cfl = 0.05;
  double min_dt = 1e-10;
  // Stop once ||u||_2 >= norm_cap_factor ||u0||_2 (0 disables).
  double norm_cap_factor = 0.0;

  void validate() const;
};

// Called with every accepted step, including t = 0.
using StepObserver = std::function<void(const FieldState&)>;

// Running Duhamel integrals I_j(t) = int_0^t rho_j(s) h^(s) ds per mode.
struct DuhamelIntegrals {
  std::vector<Complex> i0;
  std::vector<Complex> i1;
};

struct Trajectory {
  std::vector<FieldState> states;
  std::vector<double> contraction_ratios;  // per slab, worst ratio
  std::vector<int> picard_iterations;      // per slab
  // Duhamel only: integrals at each stored state, and the table used.
  std::vector<DuhamelIntegrals> integrals;
  std::shared_ptr<const KernelTable> table;
  std::size_t steps = 0;
  std::string stop_reason = "end";
  std::optional<double> blowup_time;  // last finite time before a non-finite field
  std::optional<double> cap_time;     // first time with ||u|| over the cap

  double final_time() const { return states.empty() ? 0.0 : states.back().t; }
};

// Band-limit data when the run is nonlinear so the padded evaluation is exact
// for polynomial f and the discrete energy identities close.
FieldState prepare_initial(const FieldState& s, const Nonlinearity& nl);

Trajectory evolve_mol(const FieldState& initial, double t_end, const Background& bg, const Nonlinearity& nl,
                      const SolverConfig& cfg, const StepObserver& observe = {});

// Slab-wise Picard iteration of u = K0 u0 + K1 u1 - c^2 int K2 h, integrals
// by composite Simpson on the step grid. Needs T <= T1 and M > 0.
Trajectory evolve_duhamel(const FieldState& initial, double t_end, const Background& bg, const Nonlinearity& nl,
                          const SolverConfig& cfg, const StepObserver& observe = {});

// u^(t) = rho0 u0^ + rho1 u1^ at the stride times of a run with this dt.
Trajectory evolve_free(const FieldState& initial, double t_end, const Background& bg, const SolverConfig& cfg);

struct ScatteringProfile {
  SpectralField v0, v1;
  std::vector<double> t;
  std::vector<double> residual;
  double t_max = 0.0;
  double mu = 0.0;

  // Largest residual over [frac_lo, frac_hi] * t_max.
  double window_max(double frac_lo, double frac_hi) const;
};

// u_+ = K0 v0 + K1 v1 with v0 = u0 + c^2 int_0^Tmax K1 h, v1 = u1 - c^2 int_0^Tmax K0 h.
// Residual: max over theta, k in {0, 1} of (M/a)^theta ||d_t^k (u - u_+)||_{H^{mu-1+theta}}.
ScatteringProfile scattering_profile(const Trajectory& traj, const Background& bg, double mu = 0.0);

}  // namespace flrw
