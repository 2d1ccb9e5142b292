#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pfkit {

using Index = Eigen::Index;

enum class Boundary { periodic, zero_gradient, dirichlet };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

/// Cell-centered regular Cartesian grid with 1 to 3 axes and uniform spacing.
///
/// Cell `i` along an axis has its center at `(i + 0.5) * spacing`. Face
/// neighbors are precomputed once; a neighbor across a non-periodic boundary
/// is reported as `kOutside` and resolved by the field's boundary rule.
class Grid {
 public:
  static constexpr std::int32_t kOutside = -1;

  Grid() = default;
  Grid(std::vector<Index> extents, double spacing,
       std::vector<Boundary> boundaries = {});

  int dims() const { return static_cast<int>(extents_.size()); }
  Index extent(int axis) const { return extents_[axis]; }
  const std::vector<Index>& extents() const { return extents_; }
  Index cells() const { return cells_; }
  double spacing() const { return spacing_; }
  double cell_volume() const;
  Boundary boundary(int axis) const { return boundaries_[axis]; }

  Index index(const std::array<Index, 3>& coords) const;
  std::array<Index, 3> coords(Index cell) const;
  /// Physical position of the cell center; unused axes are 0.
  Eigen::Vector3d center(Index cell) const;
  /// Physical length of the domain along `axis`.
  double length(int axis) const { return extents_[axis] * spacing_; }

  /// Face neighbor of `cell` along `axis` (side 0 = lower, 1 = upper).
  std::int32_t neighbor(Index cell, int axis, int side) const {
    return (*neighbors_)[static_cast<std::size_t>(cell) * 2 * dims() + 2 * axis + side];
  }
  /// Raw neighbor table, `2 * dims()` entries per cell.
  const std::vector<std::int32_t>& neighbor_table() const { return *neighbors_; }

  bool operator==(const Grid& other) const;

 private:
  std::vector<Index> extents_;
  double spacing_ = 1.0;
  std::vector<Boundary> boundaries_;
  Index cells_ = 0;
  std::shared_ptr<const std::vector<std::int32_t>> neighbors_;
};

/// One value per cell plus Dirichlet face values for Dirichlet axes.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Grid grid, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  Eigen::ArrayXd& values() { return values_; }
  const Eigen::ArrayXd& values() const { return values_; }
  double& operator[](Index cell) { return values_[cell]; }
  double operator[](Index cell) const { return values_[cell]; }

  void set_dirichlet(int axis, int side, double value) { dirichlet_[axis][side] = value; }
  double dirichlet(int axis, int side) const { return dirichlet_[axis][side]; }
  const std::array<std::array<double, 2>, 3>& dirichlet_values() const { return dirichlet_; }

  /// Value on the far side of the face (`axis`, `side`) of `cell`, using the
  /// ghost rules: wrap, mirror `u_i`, or `2 u_b - u_i`.
  double across(Index cell, int axis, int side) const {
    return across(values_, cell, axis, side);
  }
  double across(const Eigen::Ref<const Eigen::ArrayXd>& u, Index cell, int axis,
                int side) const;

 private:
  Grid grid_;
  Eigen::ArrayXd values_;
  std::array<std::array<double, 2>, 3> dirichlet_{};
};

/// Diffusion coefficients on cell faces. `upper(axis, i)` lives on the face
/// between cell `i` and its upper neighbor, `lower(axis, i)` on the face to
/// its lower neighbor; interior faces are shared so both entries agree.
struct FaceCoefficients {
  Eigen::ArrayXXd lower;
  Eigen::ArrayXXd upper;

  /// Arithmetic mean of the two adjacent cell values on every face; boundary
  /// faces take the adjacent cell value.
  static FaceCoefficients from_cell_means(const Grid& grid, const Eigen::ArrayXd& cell_values);
};

double laplacian(const ScalarField& field, Index cell);
double flux_divergence(const FaceCoefficients& coeff, const ScalarField& field, Index cell);
/// Applies the second-order Laplacian to every cell.
Eigen::ArrayXd laplacian(const ScalarField& field);

/// Sum of cell values times the cell volume.
double integrate(const ScalarField& field);
double integrate(const Grid& grid, const Eigen::ArrayXd& values);

}  // namespace pfkit
