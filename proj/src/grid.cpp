#include "pfkit/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfkit {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic:
      return "periodic";
    case Boundary::zero_gradient:
      return "zero-gradient";
    case Boundary::dirichlet:
      return "dirichlet";
  }
  return "?";
}

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "zero-gradient") return Boundary::zero_gradient;
  if (name == "dirichlet") return Boundary::dirichlet;
  throw std::invalid_argument("unknown boundary kind: " + name);
}

Grid::Grid(std::vector<Index> extents, double spacing, std::vector<Boundary> boundaries)
    : extents_(std::move(extents)), spacing_(spacing), boundaries_(std::move(boundaries)) {
  if (extents_.empty() || extents_.size() > 3) {
    throw std::invalid_argument("grid needs 1 to 3 axes");
  }
  if (!(spacing_ > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (boundaries_.empty()) boundaries_.assign(extents_.size(), Boundary::periodic);
  if (boundaries_.size() != extents_.size()) {
    throw std::invalid_argument("one boundary kind per axis required");
  }
  cells_ = 1;
  for (Index e : extents_) {
    if (e < 3) throw std::invalid_argument("grid extents must be at least 3");
    cells_ *= e;
  }
  if (cells_ > std::numeric_limits<std::int32_t>::max()) {
    throw std::invalid_argument("grid too large");
  }

  const int d = dims();
  auto table = std::make_shared<std::vector<std::int32_t>>(static_cast<std::size_t>(cells_) * 2 * d);
  for (Index i = 0; i < cells_; ++i) {
    auto c = coords(i);
    for (int a = 0; a < d; ++a) {
      for (int side = 0; side < 2; ++side) {
        auto n = c;
        n[a] += side == 0 ? -1 : 1;
        std::int32_t out;
        if (n[a] < 0 || n[a] >= extents_[a]) {
          if (boundaries_[a] == Boundary::periodic) {
            n[a] = (n[a] + extents_[a]) % extents_[a];
            out = static_cast<std::int32_t>(index(n));
          } else {
            out = kOutside;
          }
        } else {
          out = static_cast<std::int32_t>(index(n));
        }
        (*table)[static_cast<std::size_t>(i) * 2 * d + 2 * a + side] = out;
      }
    }
  }
  neighbors_ = std::move(table);
}

double Grid::cell_volume() const { return std::pow(spacing_, dims()); }

Index Grid::index(const std::array<Index, 3>& c) const {
  Index idx = 0;
  for (int a = dims() - 1; a >= 0; --a) idx = idx * extents_[a] + c[a];
  return idx;
}

std::array<Index, 3> Grid::coords(Index cell) const {
  std::array<Index, 3> c{0, 0, 0};
  for (int a = 0; a < dims(); ++a) {
    c[a] = cell % extents_[a];
    cell /= extents_[a];
  }
  return c;
}

Eigen::Vector3d Grid::center(Index cell) const {
  const auto c = coords(cell);
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  for (int a = 0; a < dims(); ++a) x[a] = (static_cast<double>(c[a]) + 0.5) * spacing_;
  return x;
}

bool Grid::operator==(const Grid& other) const {
  return extents_ == other.extents_ && spacing_ == other.spacing_ &&
         boundaries_ == other.boundaries_;
}

ScalarField::ScalarField(Grid grid, double fill)
    : grid_(std::move(grid)), values_(Eigen::ArrayXd::Constant(grid_.cells(), fill)) {}

double ScalarField::across(const Eigen::Ref<const Eigen::ArrayXd>& u, Index cell, int axis,
                           int side) const {
  const auto n = grid_.neighbor(cell, axis, side);
  if (n != Grid::kOutside) return u[n];
  if (grid_.boundary(axis) == Boundary::dirichlet) return 2.0 * dirichlet_[axis][side] - u[cell];
  return u[cell];
}

FaceCoefficients FaceCoefficients::from_cell_means(const Grid& grid,
                                                   const Eigen::ArrayXd& cell_values) {
  FaceCoefficients fc;
  fc.lower.resize(grid.dims(), grid.cells());
  fc.upper.resize(grid.dims(), grid.cells());
  for (Index i = 0; i < grid.cells(); ++i) {
    for (int a = 0; a < grid.dims(); ++a) {
      const auto lo = grid.neighbor(i, a, 0);
      const auto hi = grid.neighbor(i, a, 1);
      fc.lower(a, i) = lo == Grid::kOutside ? cell_values[i] : 0.5 * (cell_values[lo] + cell_values[i]);
      fc.upper(a, i) = hi == Grid::kOutside ? cell_values[i] : 0.5 * (cell_values[i] + cell_values[hi]);
    }
  }
  return fc;
}

double laplacian(const ScalarField& field, Index cell) {
  const Grid& g = field.grid();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const double ui = field[cell];
  double sum = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    sum += field.across(cell, a, 1) - 2.0 * ui + field.across(cell, a, 0);
  }
  return sum * inv_h2;
}

Eigen::ArrayXd laplacian(const ScalarField& field) {
  Eigen::ArrayXd out(field.grid().cells());
  for (Index i = 0; i < out.size(); ++i) out[i] = laplacian(field, i);
  return out;
}

double flux_divergence(const FaceCoefficients& coeff, const ScalarField& field, Index cell) {
  const Grid& g = field.grid();
  const double h = g.spacing();
  const double ui = field[cell];
  double sum = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    const double up = coeff.upper(a, cell) * (field.across(cell, a, 1) - ui) / h;
    const double lo = coeff.lower(a, cell) * (ui - field.across(cell, a, 0)) / h;
    sum += (up - lo) / h;
  }
  return sum;
}

double integrate(const Grid& grid, const Eigen::ArrayXd& values) {
  return values.sum() * grid.cell_volume();
}

double integrate(const ScalarField& field) { return integrate(field.grid(), field.values()); }

}  // namespace pfkit
