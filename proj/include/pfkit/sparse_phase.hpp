#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pfkit/grid.hpp"

namespace pfkit {

using PhaseId = std::int16_t;

/// Multiphase field storing at most `capacity` (phase id, value) entries per
/// cell in compressed-row form. Absent phases have value 0. Entries within a
/// cell are sorted by phase id.
///
/// In narrow-band mode a cell lists exactly the phases that are positive in
/// the cell or in one of its face neighbors; `refresh()` restores that
/// invariant after the values have changed.
class SparsePhaseField {
 public:
  SparsePhaseField() = default;

  /// `dense` is `phase_count x cells`. With `narrow_band == false` every
  /// cell stores all phases (requires `capacity >= phase_count`).
  static SparsePhaseField from_dense(Grid grid, int capacity, const Eigen::ArrayXXd& dense,
                                     bool narrow_band = true);

  const Grid& grid() const { return grid_; }
  int capacity() const { return capacity_; }
  int phase_count() const { return phase_count_; }
  bool narrow_band() const { return narrow_band_; }

  int count(Index cell) const { return offsets_[cell + 1] - offsets_[cell]; }
  std::span<const PhaseId> ids(Index cell) const {
    return {ids_.data() + offsets_[cell], static_cast<std::size_t>(count(cell))};
  }
  std::span<double> values(Index cell) {
    return {values_.data() + offsets_[cell], static_cast<std::size_t>(count(cell))};
  }
  std::span<const double> values(Index cell) const {
    return {values_.data() + offsets_[cell], static_cast<std::size_t>(count(cell))};
  }

  /// Flat value storage, `offsets().back()` entries.
  Eigen::ArrayXd& values() { return values_; }
  const Eigen::ArrayXd& values() const { return values_; }
  const std::vector<std::int32_t>& offsets() const { return offsets_; }
  const std::vector<PhaseId>& flat_ids() const { return ids_; }
  /// Cells that store two or more phases.
  const std::vector<std::int32_t>& interface_cells() const { return interface_cells_; }

  double value(Index cell, int phase) const { return value(values_, cell, phase); }
  /// Value of `phase` at `cell` read from an external flat value vector laid
  /// out like this field.
  double value(const Eigen::Ref<const Eigen::ArrayXd>& flat, Index cell, int phase) const {
    const auto b = offsets_[cell];
    const auto e = offsets_[cell + 1];
    for (auto k = b; k < e; ++k) {
      if (ids_[k] == phase) return flat[k];
    }
    return 0.0;
  }

  /// For entries of interface cells: flat index of the same phase in each
  /// face neighbor (`2 * dims` slots per entry, ordered axis-major, lower
  /// side first), the entry itself across a non-periodic boundary, -1 where
  /// the neighbor does not store the phase.
  const std::vector<std::int32_t>& stencil() const { return stencil_; }

  /// Number of phases positive in the cell or in any face neighbor.
  int nonzero_gradient_count(Index cell) const;

  Eigen::ArrayXd phase(int phase_id) const;
  Eigen::ArrayXXd to_dense() const;

  /// Evicts phases that vanished from the neighborhood and inserts phases
  /// that appeared in a neighbor. Returns true if the layout changed.
  bool refresh();

 private:
  int collect_candidates(Index cell, PhaseId* out) const;
  void rebuild_interface_list();
  void refresh_positivity();

  Grid grid_;
  int capacity_ = 0;
  int phase_count_ = 0;
  bool narrow_band_ = true;
  std::vector<std::int32_t> offsets_;
  std::vector<PhaseId> ids_;
  Eigen::ArrayXd values_;
  std::vector<std::int32_t> interface_cells_;
  std::vector<std::uint8_t> positive_;  // sign pattern at the last refresh
  std::vector<std::int32_t> stencil_;
};

}  // namespace pfkit
