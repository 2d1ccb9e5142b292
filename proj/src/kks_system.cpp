#include "pfkit/kks_system.hpp"

#include <array>

namespace pfkit {

namespace {

constexpr int kMaxLocal = 16;

double lookup(const SparsePhaseField& f, const Eigen::Ref<const Eigen::ArrayXd>& phi, Index cell,
              PhaseId id) {
  const auto& off = f.offsets();
  const auto& ids = f.flat_ids();
  for (auto k = off[cell]; k < off[cell + 1]; ++k) {
    if (ids[k] == id) return phi[k];
  }
  return 0.0;
}

}  // namespace

namespace detail {

void chemistry(const SparsePhaseField& f, const Eigen::Ref<const Eigen::ArrayXd>& phi,
               const Eigen::Ref<const Eigen::ArrayXd>& c, const PhysicalParams& p,
               ChemistryScratch& out) {
  const Index n = f.grid().cells();
  out.mu.resize(n);
  out.weight.resize(n);
  out.susceptibility.resize(n);
  const auto& off = f.offsets();
  const auto& ids = f.flat_ids();
  for (Index i = 0; i < n; ++i) {
    double blend = 0.0;
    double chi = 0.0;
    double w = 0.0;
    for (auto k = off[i]; k < off[i + 1]; ++k) {
      const int a = ids[k];
      const double h = phi[k];
      const double inv_k = 1.0 / p.gibbs_prefactor[a];
      blend += h * p.equilibrium_concentration[a];
      chi += h * inv_k;
      w += p.diffusivity[a] * h * inv_k;
    }
    out.mu[i] = (c[i] - blend) / chi;
    out.susceptibility[i] = chi;
    out.weight[i] = w;
  }
}

void phase_rates(const SparsePhaseField& f, const Eigen::Ref<const Eigen::ArrayXd>& phi,
                 const Eigen::ArrayXd* mu, const ModelParams& model, const PhysicalParams& p,
                 Eigen::Ref<Eigen::ArrayXd> rates) {
  rates.setZero();
  const Grid& g = f.grid();
  const int dims = g.dims();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const auto& off = f.offsets();
  const auto& ids = f.flat_ids();

  std::array<double, kMaxLocal> lap{};
  std::array<double, kMaxLocal> drive{};
  std::array<bool, kMaxLocal> active{};

  const int nn = 2 * dims;
  const auto& stencil = f.stencil();
  for (const auto cell : f.interface_cells()) {
    const auto b = off[cell];
    const int n = off[cell + 1] - b;
    int nz = 0;
    for (int k = 0; k < n; ++k) {
      const double u = phi[b + k];
      const std::int32_t* st = stencil.data() + static_cast<std::size_t>(b + k) * nn;
      bool on = u > 0.0;
      double sum = 0.0;
      for (int a = 0; a < dims; ++a) {
        const double ul = st[2 * a] < 0 ? 0.0 : phi[st[2 * a]];
        const double uh = st[2 * a + 1] < 0 ? 0.0 : phi[st[2 * a + 1]];
        on = on || ul > 0.0 || uh > 0.0;
        sum += ul - 2.0 * u + uh;
      }
      lap[k] = sum * inv_h2;
      active[k] = on;
      nz += on ? 1 : 0;
    }
    if (nz < 2) continue;

    for (int k = 0; k < n; ++k) {
      if (!active[k]) continue;
      const int alpha = ids[b + k];
      double d = 0.0;
      for (int m = 0; m < n; ++m) {
        if (m == k || !active[m]) continue;
        const int gamma = ids[b + m];
        d += model.gradient(alpha, gamma) * lap[m] + model.potential(alpha, gamma) * phi[b + m];
      }
      if (mu != nullptr) d += grand_potential((*mu)[cell], alpha, p);
      drive[k] = d;
    }
    const double inv_nz = 1.0 / nz;
    for (int k = 0; k < n; ++k) {
      if (!active[k]) continue;
      const int alpha = ids[b + k];
      double s = 0.0;
      for (int m = 0; m < n; ++m) {
        if (m == k || !active[m]) continue;
        s += model.mobility(alpha, ids[b + m]) * (drive[k] - drive[m]);
      }
      rates[b + k] = -inv_nz * s;
    }
  }
}

void concentration_rates(const ScalarField& c, const Eigen::Ref<const Eigen::ArrayXd>& cvals,
                         const ChemistryScratch& chem, Eigen::Ref<Eigen::ArrayXd> rates) {
  const Grid& g = c.grid();
  const int dims = g.dims();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const auto& table = g.neighbor_table();
  const auto& mu = chem.mu;
  const auto& w = chem.weight;
  for (Index i = 0; i < g.cells(); ++i) {
    double sum = 0.0;
    for (int a = 0; a < dims; ++a) {
      for (int side = 0; side < 2; ++side) {
        const auto j = table[static_cast<std::size_t>(i) * 2 * dims + 2 * a + side];
        if (j != Grid::kOutside) {
          sum += 0.5 * (w[i] + w[j]) * (mu[j] - mu[i]);
        } else if (g.boundary(a) == Boundary::dirichlet) {
          sum += w[i] * 2.0 * (c.dirichlet(a, side) - cvals[i]) / chem.susceptibility[i];
        }
      }
    }
    rates[i] = sum * inv_h2;
  }
}

}  // namespace detail

Eigen::ArrayXd chemical_potential(const State& state, const PhysicalParams& p) {
  if (!state.concentration) throw std::invalid_argument("state has no concentration field");
  detail::ChemistryScratch chem;
  detail::chemistry(state.phases, state.phases.values(), state.concentration->values(), p, chem);
  return chem.mu;
}

Eigen::ArrayXd phase_rhs(const State& state, const ModelParams& model, const PhysicalParams& p) {
  Eigen::ArrayXd rates(state.phases.values().size());
  if (state.concentration) {
    const Eigen::ArrayXd mu = chemical_potential(state, p);
    detail::phase_rates(state.phases, state.phases.values(), &mu, model, p, rates);
  } else {
    detail::phase_rates(state.phases, state.phases.values(), nullptr, model, p, rates);
  }
  return rates;
}

Eigen::ArrayXd concentration_rhs(const State& state, const PhysicalParams& p) {
  if (!state.concentration) throw std::invalid_argument("state has no concentration field");
  detail::ChemistryScratch chem;
  detail::chemistry(state.phases, state.phases.values(), state.concentration->values(), p, chem);
  Eigen::ArrayXd rates(state.grid().cells());
  detail::concentration_rates(*state.concentration, state.concentration->values(), chem, rates);
  return rates;
}

double free_energy(const State& state, const ModelParams& model, const PhysicalParams& p) {
  const SparsePhaseField& f = state.phases;
  const Grid& g = f.grid();
  const int dims = g.dims();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const Eigen::ArrayXd& phi = f.values();

  double gradient = 0.0;
  double obstacle = 0.0;
  double chemical = 0.0;
  Eigen::ArrayXd mu;
  if (state.concentration) mu = chemical_potential(state, p);

  for (Index i = 0; i < g.cells(); ++i) {
    const auto ids = f.ids(i);
    const auto vals = f.values(i);
    const int n = static_cast<int>(ids.size());
    for (int k = 0; k < n; ++k) {
      for (int m = k + 1; m < n; ++m) {
        obstacle += model.potential(ids[k], ids[m]) * vals[k] * vals[m];
      }
    }
    // Each interior face once, through its upper side.
    for (int a = 0; a < dims; ++a) {
      const auto j = g.neighbor(i, a, 1);
      if (j == Grid::kOutside) continue;
      std::array<PhaseId, kMaxLocal * 2> seen{};
      int ns = 0;
      for (auto id : ids) seen[ns++] = id;
      for (auto id : f.ids(j)) {
        bool dup = false;
        for (int k = 0; k < n; ++k) dup = dup || seen[k] == id;
        if (!dup) seen[ns++] = id;
      }
      for (int k = 0; k < ns; ++k) {
        const double dk = lookup(f, phi, j, seen[k]) - lookup(f, phi, i, seen[k]);
        if (dk == 0.0) continue;
        for (int m = k + 1; m < ns; ++m) {
          const double dm = lookup(f, phi, j, seen[m]) - lookup(f, phi, i, seen[m]);
          gradient -= model.gradient(seen[k], seen[m]) * dk * dm * inv_h2;
        }
      }
    }
    if (state.concentration) {
      for (int k = 0; k < n; ++k) {
        const int a = ids[k];
        const double ca = p.equilibrium_concentration[a] + mu[i] / p.gibbs_prefactor[a];
        chemical += vals[k] * gibbs_energy(ca, p.gibbs_prefactor[a], p.equilibrium_concentration[a]);
      }
    }
  }
  return (gradient + obstacle + chemical) * g.cell_volume();
}

KksSystem::KksSystem(State state, PhysicalParams params)
    : state_(std::move(state)), params_(std::move(params)), model_(derive_model_params(params_)) {
  if (state_.phases.phase_count() > params_.phases()) {
    throw std::invalid_argument("phase field has more phases than the parameter set");
  }
  if (state_.concentration && !(state_.concentration->grid() == state_.grid())) {
    throw std::invalid_argument("concentration and phase field live on different grids");
  }
}

Layout KksSystem::layout() const {
  return Layout{std::span<const std::int32_t>(state_.phases.offsets()),
                state_.concentration ? state_.grid().cells() : 0};
}

Eigen::ArrayXd KksSystem::pack() const {
  const Index np = state_.phases.values().size();
  Eigen::ArrayXd u(layout().size());
  u.head(np) = state_.phases.values();
  if (state_.concentration) u.tail(state_.grid().cells()) = state_.concentration->values();
  return u;
}

void KksSystem::unpack(const Eigen::ArrayXd& u) {
  const Index np = state_.phases.values().size();
  state_.phases.values() = u.head(np);
  if (state_.concentration) state_.concentration->values() = u.tail(state_.grid().cells());
}

void KksSystem::rhs(const Eigen::ArrayXd& u, Eigen::ArrayXd& du) {
  const Index np = state_.phases.values().size();
  du.resize(u.size());
  const auto phi = u.head(np);
  if (state_.concentration) {
    const Index nc = state_.grid().cells();
    detail::ChemistryScratch chem;
    chem.mu.swap(mu_);
    chem.weight.swap(weight_);
    chem.susceptibility.swap(susceptibility_);
    detail::chemistry(state_.phases, phi, u.tail(nc), params_, chem);
    detail::phase_rates(state_.phases, phi, &chem.mu, model_, params_, du.head(np));
    detail::concentration_rates(*state_.concentration, u.tail(nc), chem, du.tail(nc));
    chem.mu.swap(mu_);
    chem.weight.swap(weight_);
    chem.susceptibility.swap(susceptibility_);
  } else {
    detail::phase_rates(state_.phases, phi, nullptr, model_, params_, du.head(np));
  }
}

void KksSystem::accept(Eigen::ArrayXd& u) {
  unpack(u);
  if (state_.phases.narrow_band() && state_.phases.refresh()) u = pack();
}

}  // namespace pfkit
