#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace pfkit {

using Index = Eigen::Index;

/// Layout of a flat state vector: a simplex-constrained phase block stored
/// cell by cell (compressed rows given by `phase_offsets`), followed by an
/// unconstrained block of `field_size` entries.
struct Layout {
  std::span<const std::int32_t> phase_offsets;
  Index field_size = 0;

  Index phase_cells() const {
    return phase_offsets.empty() ? 0 : static_cast<Index>(phase_offsets.size()) - 1;
  }
  Index phase_size() const { return phase_offsets.empty() ? 0 : phase_offsets.back(); }
  Index size() const { return phase_size() + field_size; }
};

/// Semi-discrete system du/dt = rhs(u).
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;
  virtual Layout layout() const = 0;
  virtual void rhs(const Eigen::ArrayXd& u, Eigen::ArrayXd& du) = 0;
  /// Hook run on every accepted state; the system may change the layout and
  /// rewrite `u` accordingly.
  virtual void accept(Eigen::ArrayXd& /*u*/) {}
};

/// Counts full-domain right-hand-side evaluations.
struct RhsCounter {
  long long count = 0;
};

inline void evaluate(OdeSystem& sys, const Eigen::ArrayXd& u, Eigen::ArrayXd& du, RhsCounter& counter) {
  sys.rhs(u, du);
  ++counter.count;
}

}  // namespace pfkit
