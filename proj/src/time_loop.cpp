#include "pfkit/time_loop.hpp"

#include <algorithm>
#include <cmath>

namespace pfkit {

namespace {

bool all_finite(const Eigen::ArrayXd& u) { return u.allFinite(); }

}  // namespace

LoopResult integrate(OdeSystem& sys, Eigen::ArrayXd& u, double t0, double dt_e,
                     const IntegratorConfig& cfg, const LoopOptions& opts,
                     const StepCallback& on_step) {
  if (!(dt_e > 0.0)) throw std::invalid_argument("dt_e must be positive");
  if (!(opts.t_end > t0)) throw std::invalid_argument("end time must follow the start time");

  std::vector<double> targets;
  for (double t : opts.output_times) {
    if (t > t0 && t < opts.t_end) targets.push_back(t);
  }
  targets.push_back(opts.t_end);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  const auto is_output = [&](double t) {
    return std::find(opts.output_times.begin(), opts.output_times.end(), t) != opts.output_times.end();
  };

  const int order = method_order(cfg.method);
  double cap = std::numeric_limits<double>::infinity();
  if (cfg.adaptive && !is_sts(cfg.method)) cap = stability_factor(cfg.method, cfg.ssp_stages) * dt_e;

  double nominal = cfg.adaptive ? (cfg.initial_dt > 0.0 ? cfg.initial_dt : dt_e) : cfg.dt_factor * dt_e;
  if (!(nominal > 0.0)) throw std::invalid_argument("time step must be positive");

  StepSpec spec;
  spec.method = cfg.method;
  spec.ssp_stages = cfg.ssp_stages;
  spec.adaptive = cfg.adaptive;
  spec.tol = cfg.tol;
  EmbeddedTable table;
  if (cfg.embedded) {
    if (cfg.method != Method::ssp2) throw std::invalid_argument("embedded pair only for SSP(n)2");
    table = ssp2_euler_pair(cfg.ssp_stages);
    spec.embedded = &table;
  }

  ControllerState cs;
  RhsCounter counter;
  LoopResult res;
  res.time = t0;
  double t = t0;
  std::size_t next = 0;
  long long pending = 0;
  int rejected_run = 0;
  long long attempts = 0;

  while (next < targets.size()) {
    const double target = targets[next];
    nominal = std::min(nominal, cap);
    double dt = nominal;
    bool lands = false;
    if (t + dt >= target * (1.0 - 1e-14) || target - (t + dt) < 1e-12 * dt) {
      dt = target - t;
      lands = true;
    }
    if (!(dt > 0.0) || dt < 1e-14 * std::max(1.0, std::abs(target))) {
      throw BlowUpError("time step underflow", res.accepted);
    }
    if (is_sts(cfg.method)) {
      spec.sts_stages = cfg.sts_stages ? *cfg.sts_stages : sts_stage_count(dt, dt_e, order);
    }

    StepOutcome out;
    try {
      out = attempt_step(sys, u, dt, spec, counter);
    } catch (const DegenerateSimplexError&) {
      throw BlowUpError("state left the simplex", res.accepted);
    }
    ++attempts;
    if (!all_finite(out.state) || !std::isfinite(out.error)) {
      throw BlowUpError("non-finite state", res.accepted);
    }
    pending += out.rhs_evals;

    if (!out.accepted) {
      ++res.rejected;
      ++rejected_run;
      nominal = pid_update(cs, out.error, dt, out.estimate_order, false);
      if (opts.max_steps > 0 && attempts >= opts.max_steps) break;
      continue;
    }

    u = std::move(out.state);
    t = lands ? target : t + dt;
    sys.accept(u);
    ++res.accepted;
    if (cfg.adaptive) {
      const double proposal = pid_update(cs, out.error, dt, out.estimate_order, true);
      nominal = lands ? std::max(proposal, nominal) : proposal;
    }

    StepRecord rec;
    rec.index = res.accepted;
    rec.time = t;
    rec.dt = dt;
    rec.error = out.error;
    rec.stages = is_sts(cfg.method) ? spec.sts_stages : 0;
    rec.rhs_evals = pending;
    rec.rejected_before = rejected_run;
    rec.output = lands && is_output(target);
    res.rhs_evals += pending;
    pending = 0;
    rejected_run = 0;
    if (lands) ++next;
    res.time = t;

    if (on_step && !on_step(rec, u)) {
      res.stopped = true;
      break;
    }
    if (opts.max_steps > 0 && attempts >= opts.max_steps) break;
  }
  res.rhs_evals += pending;
  return res;
}

}  // namespace pfkit
