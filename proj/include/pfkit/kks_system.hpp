#pragma once

#include <Eigen/Dense>

#include "pfkit/model.hpp"
#include "pfkit/ode.hpp"

namespace pfkit {

/// Per-cell phase-field rates aligned with the compressed storage of
/// `state.phases`. Only phases present in the cell or a face neighbor move.
Eigen::ArrayXd phase_rhs(const State& state, const ModelParams& model, const PhysicalParams& p);

/// dc/dt from the flux form of the mixture diffusion equation.
Eigen::ArrayXd concentration_rhs(const State& state, const PhysicalParams& p);

/// Discrete gradient, obstacle and chemical energy. Gradient products are
/// taken on faces, so the energy is the one whose variation yields the
/// phase-field stencil.
double free_energy(const State& state, const ModelParams& model, const PhysicalParams& p);

/// Chemical potential per cell from the KKS partition with h = phi.
Eigen::ArrayXd chemical_potential(const State& state, const PhysicalParams& p);

/// The coupled phase-field / concentration problem as an ODE over the flat
/// vector [phase values in storage order; concentration].
///
/// Axes with Dirichlet boundaries apply the Dirichlet rule to the
/// concentration only; the phase field sees zero-gradient there.
class KksSystem : public OdeSystem {
 public:
  KksSystem(State state, PhysicalParams params);

  Layout layout() const override;
  void rhs(const Eigen::ArrayXd& u, Eigen::ArrayXd& du) override;
  /// Writes `u` back into the state, refreshes the narrow band and rewrites
  /// `u` in the new layout.
  void accept(Eigen::ArrayXd& u) override;

  Eigen::ArrayXd pack() const;
  void unpack(const Eigen::ArrayXd& u);

  State& state() { return state_; }
  const State& state() const { return state_; }
  const PhysicalParams& params() const { return params_; }
  const ModelParams& model() const { return model_; }
  bool has_concentration() const { return state_.concentration.has_value(); }

 private:
  State state_;
  PhysicalParams params_;
  ModelParams model_;
  Eigen::ArrayXd mu_;
  Eigen::ArrayXd weight_;
  Eigen::ArrayXd susceptibility_;
};

namespace detail {

struct ChemistryScratch {
  Eigen::ArrayXd mu;
  Eigen::ArrayXd weight;          // sum D h / k
  Eigen::ArrayXd susceptibility;  // sum h / k
};

void chemistry(const SparsePhaseField& layout, const Eigen::Ref<const Eigen::ArrayXd>& phi,
               const Eigen::Ref<const Eigen::ArrayXd>& c, const PhysicalParams& p,
               ChemistryScratch& out);

void phase_rates(const SparsePhaseField& layout, const Eigen::Ref<const Eigen::ArrayXd>& phi,
                 const Eigen::ArrayXd* mu, const ModelParams& model, const PhysicalParams& p,
                 Eigen::Ref<Eigen::ArrayXd> rates);

void concentration_rates(const ScalarField& c, const Eigen::Ref<const Eigen::ArrayXd>& cvals,
                         const ChemistryScratch& chem, Eigen::Ref<Eigen::ArrayXd> rates);

}  // namespace detail

}  // namespace pfkit
