#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pfkit/integrators.hpp"
#include "pfkit/kks_system.hpp"
#include "pfkit/model.hpp"

namespace pfkit {

struct EigEstimate {
  double lambda_phase = 0.0;
  double lambda_field = 0.0;

  /// Largest stable forward-Euler step.
  double dt_e() const { return 2.0 / std::max(lambda_phase, lambda_field); }
};

EigEstimate gershgorin_bounds(const State& state, const ModelParams& model, const PhysicalParams& p);

/// Stable step of an s-stage RKL scheme in units of dt_e.
double sts_stability_factor(int stages, int order);

/// Smallest odd s with 0.9 dt_e Lambda(s) >= dt_target.
int sts_stage_count(double dt_target, double dt_e, int order);

/// Stable step of a fixed-stage method in units of dt_e.
double stability_factor(Method m, int ssp_stages);

/// Soederlind PID controller with a bias on the error target.
struct ControllerState {
  static constexpr double k1 = 1.25;
  static constexpr double k2 = 0.5;
  static constexpr double k3 = -0.6;
  static constexpr double k4 = 0.25;
  static constexpr double k5 = 0.0;

  std::vector<double> errors;  // E_{n-1}, E_{n-2}
  std::vector<double> steps;   // dt_{n-1}, dt_{n-2}
  double bias = 0.9;
};

/// Proposes the next step after an attempt of size `dt` with error `e`.
double pid_update(ControllerState& cs, double e, double dt, int order, bool accepted);

/// Limiter 1 + 5 atan((F - 1) / 5).
inline double pid_limiter(double f) { return 1.0 + 5.0 * std::atan((f - 1.0) / 5.0); }

struct BoundsCheck {
  double growth = 0.0;
  bool bounded = false;
};

/// Runs forward Euler from `u0` and from a checkerboard perturbation of it
/// for `steps` steps of `dt` and compares the separation.
BoundsCheck perturbation_growth(KksSystem& sys, const Eigen::ArrayXd& u0, double dt, int steps,
                                double eps = 1e-8, double limit = 1e3);

struct BoundsValidation {
  BoundsCheck stable_arm;     // 0.9 dt_e
  BoundsCheck unstable_arm;   // 4 dt_e
  bool passed() const { return stable_arm.bounded && !unstable_arm.bounded; }
};

/// FE at 0.9 dt_e must stay bounded; FE at 4 dt_e is expected to diverge.
BoundsValidation validate_bounds(KksSystem& sys, const EigEstimate& eig, int steps = 500);

}  // namespace pfkit
