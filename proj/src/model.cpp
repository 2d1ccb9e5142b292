#include "pfkit/model.hpp"

#include <cmath>
#include <limits>

namespace pfkit {

void PhysicalParams::validate() const {
  const int n = phases();
  if (n < 1) throw std::invalid_argument("at least one phase required");
  if (interface_energy.cols() != n || mobility.rows() != n || mobility.cols() != n) {
    throw std::invalid_argument("pairwise matrices must be N x N");
  }
  if (diffusivity.size() != n || gibbs_prefactor.size() != n ||
      equilibrium_concentration.size() != n) {
    throw std::invalid_argument("per-phase vectors must have N entries");
  }
  if (!(width > 0.0)) throw std::invalid_argument("interface width must be positive");
  for (int a = 0; a < n; ++a) {
    if (!(gibbs_prefactor[a] > 0.0)) throw std::invalid_argument("k must be positive");
    if (equilibrium_concentration[a] < 0.0 || equilibrium_concentration[a] > 1.0) {
      throw std::invalid_argument("c0 must lie in [0, 1]");
    }
    if (diffusivity[a] < 0.0) throw std::invalid_argument("diffusivity must be non-negative");
    for (int b = 0; b < n; ++b) {
      if (interface_energy(a, b) != interface_energy(b, a) || mobility(a, b) != mobility(b, a)) {
        throw std::invalid_argument("pairwise matrices must be symmetric");
      }
      if (a != b && (!(interface_energy(a, b) > 0.0) || !(mobility(a, b) > 0.0))) {
        throw std::invalid_argument("off-diagonal gamma and M must be positive");
      }
    }
  }
  if (mobility_override && (mobility_override->rows() != n || mobility_override->cols() != n)) {
    throw std::invalid_argument("mobility override must be N x N");
  }
}

PhysicalParams PhysicalParams::uniform(int n, double gamma, double mobility, double width,
                                       double diffusivity, double k, double c0) {
  PhysicalParams p;
  p.interface_energy = Eigen::MatrixXd::Constant(n, n, gamma);
  p.interface_energy.diagonal().setZero();
  p.mobility = Eigen::MatrixXd::Constant(n, n, mobility);
  p.mobility.diagonal().setZero();
  p.width = width;
  p.diffusivity = Eigen::VectorXd::Constant(n, diffusivity);
  p.gibbs_prefactor = Eigen::VectorXd::Constant(n, k);
  p.equilibrium_concentration = Eigen::VectorXd::Constant(n, c0);
  return p;
}

ModelParams derive_model_params(const PhysicalParams& p) {
  p.validate();
  constexpr double pi = std::numbers::pi;
  ModelParams m;
  m.gradient = (4.0 * p.width / pi) * p.interface_energy;
  m.potential = (4.0 / (pi * p.width)) * p.interface_energy;
  m.mobility = p.mobility_override ? *p.mobility_override : Eigen::MatrixXd((pi / (4.0 * p.width)) * p.mobility);
  m.gradient.diagonal().setZero();
  m.potential.diagonal().setZero();
  m.mobility.diagonal().setZero();
  return m;
}

Partition kks_partition(double c, const Eigen::Ref<const Eigen::VectorXd>& weights,
                        const PhysicalParams& p) {
  const double blend = weights.dot(p.equilibrium_concentration);
  const double susceptibility = weights.cwiseQuotient(p.gibbs_prefactor).sum();
  if (!(susceptibility > 0.0)) throw std::domain_error("degenerate KKS partition");
  Partition out;
  out.mu = (c - blend) / susceptibility;
  out.concentration = p.equilibrium_concentration.array() + out.mu / p.gibbs_prefactor.array();
  return out;
}

void simplex_project(std::span<double> v) {
  for (double& x : v) {
    if (x < 0.0) x = 0.0;
  }
  std::size_t top = v.size();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] >= 1.0 && (top == v.size() || v[k] > v[top])) top = k;
  }
  if (top != v.size()) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = k == top ? 1.0 : 0.0;
    return;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  if (!(sum > 0.0)) throw DegenerateSimplexError("simplex projection of a non-positive vector");
  if (std::abs(sum - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) return;
  for (double& x : v) x /= sum;
}

Eigen::VectorXd simplex_project(Eigen::VectorXd values) {
  simplex_project(std::span<double>(values.data(), static_cast<std::size_t>(values.size())));
  return values;
}

double thin_interface_mobility(double diffusivity, double dc_dmu, double width,
                               double miscibility_gap) {
  constexpr double pi = std::numbers::pi;
  return pi * pi / (16.0 * width * width) * diffusivity * dc_dmu /
         (miscibility_gap * miscibility_gap * kThinInterfaceIntegral);
}

}  // namespace pfkit
