#pragma once

#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "pfkit/grid.hpp"
#include "pfkit/sparse_phase.hpp"

namespace pfkit {

/// Physical inputs of the multiphase obstacle-potential KKS model. Per-phase
/// vectors are indexed by phase-field id; several ids may share chemistry.
struct PhysicalParams {
  Eigen::MatrixXd interface_energy;  // gamma, symmetric N x N
  Eigen::MatrixXd mobility;          // M, symmetric N x N
  double width = 2.5;                // W
  Eigen::VectorXd diffusivity;       // D
  Eigen::VectorXd gibbs_prefactor;   // k
  Eigen::VectorXd equilibrium_concentration;  // c0
  /// Replaces the curvature-flow mobility L = pi M / (4 W) when set.
  std::optional<Eigen::MatrixXd> mobility_override;

  int phases() const { return static_cast<int>(interface_energy.rows()); }
  /// Throws std::invalid_argument on violated invariants.
  void validate() const;

  /// N phases sharing one set of pairwise and per-phase values.
  static PhysicalParams uniform(int n, double gamma, double mobility, double width,
                                double diffusivity, double k, double c0);
};

struct ModelParams {
  Eigen::MatrixXd gradient;   // A
  Eigen::MatrixXd potential;  // B
  Eigen::MatrixXd mobility;   // L
};

ModelParams derive_model_params(const PhysicalParams& p);

/// Equilibrium obstacle profile 1/2 (1 + sin(d / W)), clipped to [0, 1].
inline double profile(double d, double width) {
  const double edge = 0.5 * std::numbers::pi * width;
  if (d <= -edge) return 0.0;
  if (d >= edge) return 1.0;
  return 0.5 * (1.0 + std::sin(d / width));
}

struct Partition {
  double mu = 0.0;
  Eigen::VectorXd concentration;  // c_alpha per phase
};

/// Closed-form KKS split of `c` into phase concentrations for parabolic
/// Gibbs energies under equal chemical potential.
Partition kks_partition(double c, const Eigen::Ref<const Eigen::VectorXd>& weights,
                        const PhysicalParams& p);

inline double gibbs_energy(double c_alpha, double k, double c0) {
  return 0.5 * k * (c_alpha - c0) * (c_alpha - c0);
}

inline double grand_potential(double mu, double k, double c0) {
  return -mu * mu / (2.0 * k) - mu * c0;
}
inline double grand_potential(double mu, int phase, const PhysicalParams& p) {
  return grand_potential(mu, p.gibbs_prefactor[phase], p.equilibrium_concentration[phase]);
}

class DegenerateSimplexError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Projects onto the Gibbs simplex in place: negatives become 0, a value
/// >= 1 takes all weight, then the vector is divided by its sum. A sum that
/// is already 1 to within a few ulps is left alone so the map is idempotent.
void simplex_project(std::span<double> values);
Eigen::VectorXd simplex_project(Eigen::VectorXd values);

/// Phase-field mobility that cancels the interface kinetic coefficient for a
/// two-phase alloy with equal diffusivities.
double thin_interface_mobility(double diffusivity, double dc_dmu, double width,
                               double miscibility_gap);
inline constexpr double kThinInterfaceIntegral = 0.3084251;  // M + F

/// Phase field plus optional concentration at one instant.
struct State {
  SparsePhaseField phases;
  std::optional<ScalarField> concentration;
  double time = 0.0;

  const Grid& grid() const { return phases.grid(); }
};

}  // namespace pfkit
