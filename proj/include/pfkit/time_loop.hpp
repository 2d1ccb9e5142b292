#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pfkit/integrators.hpp"
#include "pfkit/ode.hpp"
#include "pfkit/stepcontrol.hpp"

namespace pfkit {

struct IntegratorConfig {
  Method method = Method::feuler;
  int ssp_stages = 5;
  bool adaptive = false;
  /// Fixed mode: dt = dt_factor * dt_e.
  double dt_factor = 1.0;
  /// Fixed STS stage count; chosen from dt and dt_e when empty.
  std::optional<int> sts_stages;
  Tolerances tol;
  /// Adaptive SSP(n)2 with the embedded Euler pair instead of step halving.
  bool embedded = false;
  /// First adaptive step; dt_e when 0.
  double initial_dt = 0.0;
};

struct StepRecord {
  long long index = 0;
  double time = 0.0;  // after the step
  double dt = 0.0;
  double error = 0.0;
  int stages = 0;
  /// Evaluations of this step plus those of rejected attempts before it.
  long long rhs_evals = 0;
  int rejected_before = 0;
  bool output = false;
};

struct LoopOptions {
  double t_end = 0.0;
  std::vector<double> output_times;
  long long max_steps = 0;  // 0: unlimited
};

struct LoopResult {
  double time = 0.0;
  long long accepted = 0;
  long long rejected = 0;
  long long rhs_evals = 0;
  bool stopped = false;  // a callback ended the run
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, long long step) : std::runtime_error(what), step_(step) {}
  long long step() const { return step_; }

 private:
  long long step_;
};

/// Return false to stop the run.
using StepCallback = std::function<bool(const StepRecord&, const Eigen::ArrayXd&)>;

/// Integrates `u` from `t0` to `opts.t_end`, landing exactly on every output
/// time. `u` is left at the final accepted state.
LoopResult integrate(OdeSystem& sys, Eigen::ArrayXd& u, double t0, double dt_e,
                     const IntegratorConfig& cfg, const LoopOptions& opts,
                     const StepCallback& on_step = {});

}  // namespace pfkit
