#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pfkit/grid.hpp"

namespace pfkit {

struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

struct ContourSegmentSet {
  std::vector<Segment> segments;

  double total_length() const;
  bool empty() const { return segments.empty(); }
  /// Axis-aligned extent of all segment endpoints: (min x, min y, max x, max y).
  Eigen::Vector4d bounds() const;
};

class NoCrossingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Position along a line of samples where the local cubic interpolant
/// through the four samples bracketing the first sign change of
/// `value - level` reaches `level`. Sample `k` sits at `k * spacing`.
double half_crossing(const Eigen::Ref<const Eigen::ArrayXd>& values, double spacing,
                     double level = 0.5);

/// Same bracket search with plain linear interpolation.
double linear_crossing(const Eigen::Ref<const Eigen::ArrayXd>& values, double spacing,
                       double level = 0.5);

/// 16-case marching squares on a 2D cell-centered field. Saddles are
/// resolved with the mean of the four corner values.
ContourSegmentSet marching_squares(const Grid& grid, const Eigen::Ref<const Eigen::ArrayXd>& values,
                                   double level);

}  // namespace pfkit
