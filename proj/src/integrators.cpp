#include "pfkit/integrators.hpp"

#include <cmath>
#include <stdexcept>

#include "pfkit/model.hpp"

namespace pfkit {

std::string to_string(Method m) {
  switch (m) {
    case Method::feuler: return "feuler";
    case Method::ssp2: return "ssp2";
    case Method::ssp104: return "ssp104";
    case Method::sts1: return "sts1";
    case Method::sts2: return "sts2";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "feuler" || name == "fe") return Method::feuler;
  if (name == "ssp2" || name == "ssp52") return Method::ssp2;
  if (name == "ssp104") return Method::ssp104;
  if (name == "sts1") return Method::sts1;
  if (name == "sts2") return Method::sts2;
  throw std::invalid_argument("unknown integrator: " + name);
}

int method_order(Method m) {
  switch (m) {
    case Method::feuler: return 1;
    case Method::ssp2: return 2;
    case Method::ssp104: return 4;
    case Method::sts1: return 1;
    case Method::sts2: return 2;
  }
  return 1;
}

bool is_sts(Method m) { return m == Method::sts1 || m == Method::sts2; }

void project_simplex(const Layout& layout, Eigen::ArrayXd& u) {
  const Index cells = layout.phase_cells();
  const auto& off = layout.phase_offsets;
  for (Index i = 0; i < cells; ++i) {
    const auto b = off[i];
    const auto n = off[i + 1] - b;
    if (n == 1 && u[b] > 0.0) {
      u[b] = 1.0;
      continue;
    }
    simplex_project(std::span<double>(u.data() + b, static_cast<std::size_t>(n)));
  }
}

Eigen::ArrayXd feuler_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, RhsCounter& counter) {
  Eigen::ArrayXd du;
  evaluate(sys, u, du, counter);
  Eigen::ArrayXd out = u + dt * du;
  project_simplex(sys.layout(), out);
  return out;
}

Eigen::ArrayXd ssp2_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, int stages,
                         RhsCounter& counter, std::vector<Eigen::ArrayXd>* stage_rhs) {
  if (stages < 2) throw std::invalid_argument("SSP(n)2 needs n >= 2");
  const Layout layout = sys.layout();
  const double h = dt / (stages - 1);
  Eigen::ArrayXd y = u;
  Eigen::ArrayXd du;
  if (stage_rhs) stage_rhs->clear();
  for (int j = 1; j < stages; ++j) {
    evaluate(sys, y, du, counter);
    if (stage_rhs) stage_rhs->push_back(du);
    y += h * du;
    project_simplex(layout, y);
  }
  evaluate(sys, y, du, counter);
  if (stage_rhs) stage_rhs->push_back(du);
  const double n = stages;
  Eigen::ArrayXd out = (1.0 / n) * u + ((n - 1.0) / n) * (y + h * du);
  project_simplex(layout, out);
  return out;
}

Eigen::ArrayXd ssp104_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, RhsCounter& counter,
                           std::vector<Eigen::ArrayXd>* stage_rhs) {
  const Layout layout = sys.layout();
  Eigen::ArrayXd q1 = u;
  Eigen::ArrayXd q2 = u;
  Eigen::ArrayXd du;
  if (stage_rhs) stage_rhs->clear();
  auto euler = [&](double h) {
    evaluate(sys, q1, du, counter);
    if (stage_rhs) stage_rhs->push_back(du);
    q1 += h * du;
    project_simplex(layout, q1);
  };
  for (int i = 0; i < 5; ++i) euler(dt / 6.0);
  q2 = (1.0 / 25.0) * q2 + (9.0 / 25.0) * q1;
  q1 = 15.0 * q2 - 5.0 * q1;
  project_simplex(layout, q1);
  for (int i = 0; i < 4; ++i) euler(dt / 6.0);
  evaluate(sys, q1, du, counter);
  if (stage_rhs) stage_rhs->push_back(du);
  Eigen::ArrayXd out = q2 + (3.0 / 5.0) * q1 + (dt / 10.0) * du;
  project_simplex(layout, out);
  return out;
}

StsCoeffs sts_coeffs(int s, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("STS order must be 1 or 2");
  if (s % 2 == 0 || s < (order == 1 ? 1 : 3)) {
    throw std::invalid_argument("STS stage count must be odd and at least order + 1");
  }
  StsCoeffs c;
  c.stages = s;
  c.order = order;
  c.mu.assign(s + 1, 0.0);
  c.nu.assign(s + 1, 0.0);
  c.mu_tilde.assign(s + 1, 0.0);
  c.gamma_tilde.assign(s + 1, 0.0);
  if (order == 1) {
    const double w1 = 2.0 / (static_cast<double>(s) * s + s);
    c.mu[1] = 1.0;
    c.mu_tilde[1] = w1;
    for (int j = 2; j <= s; ++j) {
      c.mu[j] = (2.0 * j - 1.0) / j;
      c.nu[j] = -(j - 1.0) / j;
      c.mu_tilde[j] = w1 * c.mu[j];
    }
    return c;
  }
  const double w1 = 4.0 / (static_cast<double>(s) * s + s - 2.0);
  auto b = [](int j) { return j < 3 ? 1.0 / 3.0 : (double(j) * j + j - 2.0) / (2.0 * j * (j + 1.0)); };
  c.mu[1] = 1.0;
  c.mu_tilde[1] = b(1) * w1;
  for (int j = 2; j <= s; ++j) {
    c.mu[j] = (2.0 * j - 1.0) / j * b(j) / b(j - 1);
    c.nu[j] = -(j - 1.0) / j * b(j) / b(j - 2);
    c.mu_tilde[j] = c.mu[j] * w1;
    c.gamma_tilde[j] = -(1.0 - b(j - 1)) * c.mu_tilde[j];
  }
  return c;
}

Eigen::ArrayXd sts2_simplex_fixup(const Layout& layout, const Eigen::ArrayXd& u0,
                                  const Eigen::ArrayXd& u1_raw, const Eigen::ArrayXd& rhs0,
                                  double mu1_dt) {
  Eigen::ArrayXd out = rhs0;
  const auto& off = layout.phase_offsets;
  for (Index i = 0; i < layout.phase_cells(); ++i) {
    const auto b = off[i];
    const auto n = off[i + 1] - b;
    bool violated = false;
    for (auto k = b; k < b + n; ++k) violated = violated || u1_raw[k] < 0.0 || u1_raw[k] > 1.0;
    if (!violated) continue;
    Eigen::VectorXd cell = u1_raw.segment(b, n).matrix();
    cell = simplex_project(cell);
    out.segment(b, n) = (cell.array() - u0.segment(b, n)) / mu1_dt;
  }
  return out;
}

StsResult sts_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, const StsCoeffs& c,
                   RhsCounter& counter) {
  const Layout layout = sys.layout();
  StsResult r;
  evaluate(sys, u, r.rhs0, counter);
  Eigen::ArrayXd prev2 = u;
  Eigen::ArrayXd prev = u + c.mu_tilde[1] * dt * r.rhs0;
  if (c.order == 2) r.rhs0 = sts2_simplex_fixup(layout, u, prev, r.rhs0, c.mu_tilde[1] * dt);
  project_simplex(layout, prev);
  Eigen::ArrayXd du;
  Eigen::ArrayXd next;
  for (int j = 2; j <= c.stages; ++j) {
    evaluate(sys, prev, du, counter);
    next = c.mu[j] * prev + c.nu[j] * prev2 + (1.0 - c.mu[j] - c.nu[j]) * u +
           (c.mu_tilde[j] * dt) * du;
    if (c.gamma_tilde[j] != 0.0) next += (c.gamma_tilde[j] * dt) * r.rhs0;
    project_simplex(layout, next);
    prev2.swap(prev);
    prev.swap(next);
  }
  r.state = std::move(prev);
  return r;
}

Eigen::ArrayXd sommeijer_error(const Layout& layout, const Eigen::ArrayXd& u_n,
                               const Eigen::ArrayXd& u_np1, const Eigen::ArrayXd& rhs_n,
                               const Eigen::ArrayXd& rhs_np1, double dt) {
  Eigen::ArrayXd e = (12.0 * (u_np1 - u_n) - 6.0 * dt * (rhs_n + rhs_np1)) / 15.0;
  const Index np = layout.phase_size();
  for (Index k = 0; k < np; ++k) {
    const double trial = u_n[k] + 0.5 * dt * (rhs_n[k] + rhs_np1[k]);
    if (trial < 0.0 || trial > 1.0) e[k] = 0.0;
  }
  return e;
}

double weighted_error_norm(const Layout& layout, const Eigen::ArrayXd& errors,
                           const Eigen::ArrayXd& u_n, const Eigen::ArrayXd& u_np1,
                           const Tolerances& tol) {
  double sum = 0.0;
  double count = 0.0;
  const auto& off = layout.phase_offsets;
  for (Index i = 0; i < layout.phase_cells(); ++i) {
    int nontrivial = 0;
    for (auto k = off[i]; k < off[i + 1]; ++k) {
      if (errors[k] == 0.0) continue;
      ++nontrivial;
      const double scale =
          tol.phase_rel * std::max(std::abs(u_n[k]), std::abs(u_np1[k])) + tol.phase_abs;
      const double q = errors[k] / scale;
      sum += q * q;
    }
    count += nontrivial == 0 ? 2.0 : nontrivial;
  }
  const Index np = layout.phase_size();
  for (Index k = np; k < layout.size(); ++k) {
    const double scale =
        tol.field_rel * std::max(std::abs(u_n[k]), std::abs(u_np1[k])) + tol.field_abs;
    const double q = errors[k] / scale;
    sum += q * q;
    count += 1.0;
  }
  return count > 0.0 ? std::sqrt(sum / count) : 0.0;
}

EmbeddedTable ssp2_euler_pair(int stages) {
  EmbeddedTable t;
  t.weights.assign(stages, 1.0 / stages);
  t.weights[0] -= 1.0;
  t.order = 1;
  return t;
}

namespace {

Eigen::ArrayXd plain_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, const StepSpec& spec,
                          RhsCounter& counter, std::vector<Eigen::ArrayXd>* stage_rhs = nullptr) {
  switch (spec.method) {
    case Method::feuler: {
      if (stage_rhs) {
        Eigen::ArrayXd du;
        evaluate(sys, u, du, counter);
        stage_rhs->assign(1, du);
        Eigen::ArrayXd out = u + dt * du;
        project_simplex(sys.layout(), out);
        return out;
      }
      return feuler_step(sys, u, dt, counter);
    }
    case Method::ssp2: return ssp2_step(sys, u, dt, spec.ssp_stages, counter, stage_rhs);
    case Method::ssp104: return ssp104_step(sys, u, dt, counter, stage_rhs);
    case Method::sts1:
    case Method::sts2:
      return sts_step(sys, u, dt, sts_coeffs(spec.sts_stages, method_order(spec.method)), counter)
          .state;
  }
  throw std::logic_error("unreachable");
}

}  // namespace

StepOutcome attempt_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, const StepSpec& spec,
                         RhsCounter& counter) {
  StepOutcome out;
  const long long start = counter.count;
  const int order = method_order(spec.method);
  out.estimate_order = order;
  if (!spec.adaptive) {
    out.state = plain_step(sys, u, dt, spec, counter);
  } else if (is_sts(spec.method)) {
    const StsResult r = sts_step(sys, u, dt, sts_coeffs(spec.sts_stages, order), counter);
    Eigen::ArrayXd rhs1;
    evaluate(sys, r.state, rhs1, counter);
    const Layout layout = sys.layout();
    const Eigen::ArrayXd e = sommeijer_error(layout, u, r.state, r.rhs0, rhs1, dt);
    out.error = weighted_error_norm(layout, e, u, r.state, spec.tol);
    out.state = r.state;
  } else if (spec.embedded != nullptr) {
    std::vector<Eigen::ArrayXd> stages;
    out.state = plain_step(sys, u, dt, spec, counter, &stages);
    if (stages.size() != spec.embedded->weights.size()) {
      throw std::invalid_argument("embedded table does not match the stage count");
    }
    Eigen::ArrayXd e = Eigen::ArrayXd::Zero(u.size());
    for (std::size_t j = 0; j < stages.size(); ++j) e += (dt * spec.embedded->weights[j]) * stages[j];
    out.error = weighted_error_norm(sys.layout(), e, u, out.state, spec.tol);
    out.estimate_order = spec.embedded->order;
  } else {
    const Eigen::ArrayXd full = plain_step(sys, u, dt, spec, counter);
    const Eigen::ArrayXd half = plain_step(sys, u, 0.5 * dt, spec, counter);
    const Eigen::ArrayXd two = plain_step(sys, half, 0.5 * dt, spec, counter);
    const Eigen::ArrayXd e = (two - full) / (std::pow(2.0, order) - 1.0);
    out.error = weighted_error_norm(sys.layout(), e, u, two, spec.tol);
    out.state = two;
  }
  out.accepted = !spec.adaptive || out.error < 1.0;
  out.rhs_evals = counter.count - start;
  return out;
}

}  // namespace pfkit
