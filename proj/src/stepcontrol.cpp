#include "pfkit/stepcontrol.hpp"

#include <cmath>
#include <stdexcept>

namespace pfkit {

EigEstimate gershgorin_bounds(const State& state, const ModelParams& model, const PhysicalParams& p) {
  const Grid& g = state.grid();
  const double lap = 4.0 * g.dims() / (g.spacing() * g.spacing());
  const int n = p.phases();

  double chi = 0.0;
  if (state.concentration) {
    const double dc0 = p.equilibrium_concentration.maxCoeff() - p.equilibrium_concentration.minCoeff();
    chi = p.gibbs_prefactor.maxCoeff() * dc0 * dc0;
  }
  EigEstimate est;
  est.lambda_phase =
      2.0 * model.mobility.maxCoeff() * (model.gradient.maxCoeff() * lap + model.potential.maxCoeff() + chi);
  if (state.concentration) {
    double slope = 0.0;
    const SparsePhaseField& f = state.phases;
    for (Index i = 0; i < g.cells(); ++i) {
      const auto ids = f.ids(i);
      const auto vals = f.values(i);
      double s = 0.0;
      for (std::size_t k = 0; k < ids.size(); ++k) s += vals[k] / p.gibbs_prefactor[ids[k]];
      for (int a = 0; a < n; ++a) slope = std::max(slope, (1.0 / p.gibbs_prefactor[a]) / s);
    }
    est.lambda_field = lap * p.diffusivity.maxCoeff() * slope;
  }
  return est;
}

double sts_stability_factor(int s, int order) {
  const double ds = s;
  return order == 1 ? 0.5 * (ds * ds + ds) : 0.25 * (ds * ds + ds - 2.0);
}

int sts_stage_count(double dt_target, double dt_e, int order) {
  if (!(dt_target > 0.0) || !(dt_e > 0.0)) throw std::invalid_argument("step sizes must be positive");
  int s = order == 1 ? 1 : 3;
  while (0.9 * dt_e * sts_stability_factor(s, order) < dt_target) s += 2;
  return s;
}

double stability_factor(Method m, int ssp_stages) {
  switch (m) {
    case Method::feuler: return 1.0;
    case Method::ssp2: return ssp_stages - 1.0;
    case Method::ssp104: return 6.0;
    default: throw std::invalid_argument("stage count of STS methods is chosen per step");
  }
}

double pid_update(ControllerState& cs, double e, double dt, int order, bool accepted) {
  const double inv = 1.0 / (order + 1.0);
  const double en = std::max(e / cs.bias, 1e-12);
  double f = std::pow(en, -ControllerState::k1);
  if (!cs.errors.empty()) f *= std::pow(cs.errors[0], -ControllerState::k2);
  if (cs.errors.size() > 1) f *= std::pow(cs.errors[1], -ControllerState::k3);
  f = std::pow(f, inv);
  if (!cs.steps.empty()) f *= std::pow(dt / cs.steps[0], ControllerState::k4);
  if (cs.steps.size() > 1) f *= std::pow(cs.steps[0] / cs.steps[1], ControllerState::k5);

  if (accepted) {
    cs.bias = std::min(std::sqrt(cs.bias), 0.98);
    cs.errors.insert(cs.errors.begin(), en);
    cs.steps.insert(cs.steps.begin(), dt);
    if (cs.errors.size() > 2) cs.errors.pop_back();
    if (cs.steps.size() > 2) cs.steps.pop_back();
  } else {
    cs.bias = std::max(cs.bias * cs.bias, 0.1);
    if (f >= 1.0) f = std::pow(en, -ControllerState::k1 * inv);
  }
  return dt * pid_limiter(f);
}

BoundsCheck perturbation_growth(KksSystem& sys, const Eigen::ArrayXd& u0, double dt, int steps,
                                double eps, double limit) {
  const Grid& g = sys.state().grid();
  const Layout layout = sys.layout();
  Eigen::ArrayXd v = u0;
  const auto& off = layout.phase_offsets;
  for (Index i = 0; i < layout.phase_cells(); ++i) {
    if (off[i + 1] - off[i] < 2) continue;
    const auto c = g.coords(i);
    const double s = ((c[0] + c[1] + c[2]) % 2 == 0) ? eps : -eps;
    v[off[i]] += s;
    v[off[i] + 1] -= s;
  }
  const Index np = layout.phase_size();
  for (Index k = 0; k < layout.field_size; ++k) {
    const auto c = g.coords(k);
    v[np + k] += ((c[0] + c[1] + c[2]) % 2 == 0) ? eps : -eps;
  }
  project_simplex(layout, v);

  Eigen::ArrayXd u = u0;
  const double d0 = (v - u).matrix().norm();
  RhsCounter counter;
  BoundsCheck out;
  for (int n = 0; n < steps; ++n) {
    try {
      u = feuler_step(sys, u, dt, counter);
      v = feuler_step(sys, v, dt, counter);
    } catch (const std::exception&) {
      out.growth = std::numeric_limits<double>::infinity();
      return out;
    }
    const double d = (v - u).matrix().norm() / d0;
    if (!std::isfinite(d)) {
      out.growth = std::numeric_limits<double>::infinity();
      return out;
    }
    out.growth = std::max(out.growth, d);
    if (out.growth > limit) return out;
  }
  out.bounded = out.growth < limit;
  return out;
}

BoundsValidation validate_bounds(KksSystem& sys, const EigEstimate& eig, int steps) {
  const Eigen::ArrayXd u0 = sys.pack();
  BoundsValidation v;
  v.stable_arm = perturbation_growth(sys, u0, 0.9 * eig.dt_e(), steps);
  v.unstable_arm = perturbation_growth(sys, u0, 4.0 * eig.dt_e(), steps);
  return v;
}

}  // namespace pfkit
