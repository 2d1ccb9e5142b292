#include "pfkit/sparse_phase.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace pfkit {

namespace {

constexpr int kMaxCandidates = 64;

}  // namespace

SparsePhaseField SparsePhaseField::from_dense(Grid grid, int capacity, const Eigen::ArrayXXd& dense,
                                              bool narrow_band) {
  if (dense.cols() != grid.cells()) throw std::invalid_argument("dense field size mismatch");
  if (capacity < 1) throw std::invalid_argument("phase capacity must be positive");
  const int n = static_cast<int>(dense.rows());
  if (!narrow_band && capacity < n) {
    throw std::invalid_argument("dense storage needs capacity >= phase count");
  }

  SparsePhaseField f;
  f.grid_ = std::move(grid);
  f.capacity_ = capacity;
  f.phase_count_ = n;
  f.narrow_band_ = narrow_band;

  const Grid& g = f.grid_;
  const int nn = 2 * g.dims();
  f.offsets_.assign(static_cast<std::size_t>(g.cells()) + 1, 0);
  std::vector<PhaseId> ids;
  std::vector<double> vals;
  ids.reserve(static_cast<std::size_t>(g.cells()) * 2);
  vals.reserve(static_cast<std::size_t>(g.cells()) * 2);
  for (Index i = 0; i < g.cells(); ++i) {
    int cnt = 0;
    for (int p = 0; p < n; ++p) {
      bool keep = !narrow_band || dense(p, i) > 0.0;
      for (int k = 0; k < nn && !keep; ++k) {
        const auto nb = g.neighbor_table()[static_cast<std::size_t>(i) * nn + k];
        if (nb != Grid::kOutside && dense(p, nb) > 0.0) keep = true;
      }
      if (keep) {
        ids.push_back(static_cast<PhaseId>(p));
        vals.push_back(dense(p, i));
        ++cnt;
      }
    }
    if (cnt > capacity) throw std::length_error("phase capacity exceeded");
    f.offsets_[i + 1] = f.offsets_[i] + cnt;
  }
  f.ids_ = std::move(ids);
  f.values_ = Eigen::Map<const Eigen::ArrayXd>(vals.data(), static_cast<Index>(vals.size()));
  f.rebuild_interface_list();
  return f;
}

int SparsePhaseField::nonzero_gradient_count(Index cell) const {
  std::array<PhaseId, kMaxCandidates> buf{};
  return collect_candidates(cell, buf.data());
}

int SparsePhaseField::collect_candidates(Index cell, PhaseId* out) const {
  int cnt = 0;
  auto add = [&](PhaseId p) {
    for (int k = 0; k < cnt; ++k) {
      if (out[k] == p) return;
    }
    if (cnt == kMaxCandidates) throw std::length_error("too many phases around a cell");
    out[cnt++] = p;
  };
  auto scan = [&](Index c) {
    for (auto k = offsets_[c]; k < offsets_[c + 1]; ++k) {
      if (values_[k] > 0.0) add(ids_[k]);
    }
  };
  scan(cell);
  const int nn = 2 * grid_.dims();
  const auto* nb = grid_.neighbor_table().data() + static_cast<std::size_t>(cell) * nn;
  for (int k = 0; k < nn; ++k) {
    if (nb[k] != Grid::kOutside) scan(nb[k]);
  }
  std::sort(out, out + cnt);
  return cnt;
}

Eigen::ArrayXd SparsePhaseField::phase(int phase_id) const {
  Eigen::ArrayXd out(grid_.cells());
  for (Index i = 0; i < grid_.cells(); ++i) out[i] = value(i, phase_id);
  return out;
}

Eigen::ArrayXXd SparsePhaseField::to_dense() const {
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(phase_count_, grid_.cells());
  for (Index i = 0; i < grid_.cells(); ++i) {
    for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) out(ids_[k], i) = values_[k];
  }
  return out;
}

bool SparsePhaseField::refresh() {
  if (!narrow_band_) return false;
  std::array<PhaseId, kMaxCandidates> buf{};
  const Index cells = grid_.cells();
  const int nn = 2 * grid_.dims();
  const auto& table = grid_.neighbor_table();

  // A cell's list can only change where an entry crossed zero in the cell
  // or one of its neighbors.
  // Cells holding a single phase keep it at 1, so only interface cells
  // need a look.
  std::vector<std::int32_t> touched;
  for (const auto i : interface_cells_) {
    for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if ((values_[k] > 0.0) != (positive_[k] != 0)) {
        touched.push_back(static_cast<std::int32_t>(i));
        break;
      }
    }
  }
  if (touched.empty()) return false;

  std::vector<std::uint8_t> dirty(static_cast<std::size_t>(cells), 0);
  for (auto c : touched) {
    dirty[c] = 1;
    for (int k = 0; k < nn; ++k) {
      const auto nb = table[static_cast<std::size_t>(c) * nn + k];
      if (nb != Grid::kOutside) dirty[nb] = 1;
    }
  }
  bool changed = false;
  for (Index i = 0; i < cells && !changed; ++i) {
    if (!dirty[i]) continue;
    const int cnt = collect_candidates(i, buf.data());
    const auto cur = ids(i);
    changed = cnt != count(i) || !std::equal(cur.begin(), cur.end(), buf.begin());
  }
  if (!changed) {
    refresh_positivity();
    return false;
  }

  std::vector<std::int32_t> offsets(offsets_.size(), 0);
  std::vector<PhaseId> new_ids;
  std::vector<double> vals;
  new_ids.reserve(ids_.size() + 64);
  vals.reserve(ids_.size() + 64);
  for (Index i = 0; i < cells; ++i) {
    if (dirty[i]) {
      const int cnt = collect_candidates(i, buf.data());
      if (cnt > capacity_) throw std::length_error("phase capacity exceeded");
      for (int k = 0; k < cnt; ++k) {
        new_ids.push_back(buf[k]);
        vals.push_back(value(i, buf[k]));
      }
    } else {
      for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) {
        new_ids.push_back(ids_[k]);
        vals.push_back(values_[k]);
      }
    }
    offsets[i + 1] = static_cast<std::int32_t>(new_ids.size());
  }
  offsets_ = std::move(offsets);
  ids_ = std::move(new_ids);
  values_ = Eigen::Map<const Eigen::ArrayXd>(vals.data(), static_cast<Index>(vals.size()));
  rebuild_interface_list();
  return true;
}

void SparsePhaseField::refresh_positivity() {
  positive_.resize(static_cast<std::size_t>(values_.size()));
  for (Index k = 0; k < values_.size(); ++k) positive_[k] = values_[k] > 0.0 ? 1 : 0;
}

void SparsePhaseField::rebuild_interface_list() {
  interface_cells_.clear();
  for (Index i = 0; i < grid_.cells(); ++i) {
    if (count(i) >= 2) interface_cells_.push_back(static_cast<std::int32_t>(i));
  }
  refresh_positivity();

  const int nn = 2 * grid_.dims();
  stencil_.assign(static_cast<std::size_t>(values_.size()) * nn, -1);
  for (const auto i : interface_cells_) {
    for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      for (int n = 0; n < nn; ++n) {
        const auto nb = grid_.neighbor(i, n / 2, n % 2);
        std::int32_t at = -1;
        if (nb == Grid::kOutside) {
          at = k;
        } else {
          for (auto m = offsets_[nb]; m < offsets_[nb + 1]; ++m) {
            if (ids_[m] == ids_[k]) at = m;
          }
        }
        stencil_[static_cast<std::size_t>(k) * nn + n] = at;
      }
    }
  }
}

}  // namespace pfkit
