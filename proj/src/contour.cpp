#include "pfkit/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pfkit {

double ContourSegmentSet::total_length() const {
  double len = 0.0;
  for (const auto& s : segments) len += (s.b - s.a).norm();
  return len;
}

Eigen::Vector4d ContourSegmentSet::bounds() const {
  Eigen::Vector4d b(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity());
  for (const auto& s : segments) {
    for (const auto& p : {s.a, s.b}) {
      b[0] = std::min(b[0], p.x());
      b[1] = std::min(b[1], p.y());
      b[2] = std::max(b[2], p.x());
      b[3] = std::max(b[3], p.y());
    }
  }
  return b;
}

namespace {

// First bracket [k, k+1] with a sign change of (value - level); -1 if none.
Index find_bracket(const Eigen::Ref<const Eigen::ArrayXd>& v, double level) {
  for (Index k = 0; k + 1 < v.size(); ++k) {
    const double a = v[k] - level;
    const double b = v[k + 1] - level;
    if (a == 0.0 || (a < 0.0) != (b < 0.0)) return k;
  }
  if (v.size() > 0 && v[v.size() - 1] == level) return v.size() - 1;
  return -1;
}

}  // namespace

double linear_crossing(const Eigen::Ref<const Eigen::ArrayXd>& values, double spacing,
                       double level) {
  const Index k = find_bracket(values, level);
  if (k < 0) throw NoCrossingError("no crossing of the requested level");
  if (values[k] == level || k + 1 == values.size()) return static_cast<double>(k) * spacing;
  const double t = (level - values[k]) / (values[k + 1] - values[k]);
  return (static_cast<double>(k) + t) * spacing;
}

double half_crossing(const Eigen::Ref<const Eigen::ArrayXd>& values, double spacing,
                     double level) {
  const Index n = values.size();
  const Index k = find_bracket(values, level);
  if (k < 0) throw NoCrossingError("no crossing of the requested level");
  if (values[k] == level || k + 1 == n) return static_cast<double>(k) * spacing;

  // Four-point window [k-1, k+2], shifted to stay inside the sequence.
  const Index width = std::min<Index>(4, n);
  Index first = std::clamp<Index>(k - 1, 0, n - width);
  std::array<double, 4> xs{};
  std::array<double, 4> ys{};
  for (Index j = 0; j < width; ++j) {
    xs[j] = static_cast<double>(first + j);
    ys[j] = values[first + j] - level;
  }
  auto interp = [&](double x) {
    double sum = 0.0;
    for (Index j = 0; j < width; ++j) {
      double w = 1.0;
      for (Index m = 0; m < width; ++m) {
        if (m != j) w *= (x - xs[m]) / (xs[j] - xs[m]);
      }
      sum += w * ys[j];
    }
    return sum;
  };

  double lo = static_cast<double>(k);
  double hi = lo + 1.0;
  double flo = values[k] - level;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double fm = interp(mid);
    if (fm == 0.0) return mid * spacing;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi) * spacing;
}

ContourSegmentSet marching_squares(const Grid& grid, const Eigen::Ref<const Eigen::ArrayXd>& values,
                                   double level) {
  if (grid.dims() != 2) throw std::invalid_argument("marching squares needs a 2D grid");
  ContourSegmentSet out;
  const Index nx = grid.extent(0);
  const Index ny = grid.extent(1);
  const double h = grid.spacing();

  // Corner order: 0 = (i, j), 1 = (i+1, j), 2 = (i+1, j+1), 3 = (i, j+1).
  static constexpr std::array<std::array<int, 2>, 4> kEdgeCorners{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
  for (Index j = 0; j + 1 < ny; ++j) {
    for (Index i = 0; i + 1 < nx; ++i) {
      const std::array<Index, 4> idx{grid.index({i, j, 0}), grid.index({i + 1, j, 0}),
                                     grid.index({i + 1, j + 1, 0}), grid.index({i, j + 1, 0})};
      const std::array<Eigen::Vector2d, 4> pos{
          Eigen::Vector2d((i + 0.5) * h, (j + 0.5) * h), Eigen::Vector2d((i + 1.5) * h, (j + 0.5) * h),
          Eigen::Vector2d((i + 1.5) * h, (j + 1.5) * h), Eigen::Vector2d((i + 0.5) * h, (j + 1.5) * h)};
      std::array<double, 4> v{};
      int code = 0;
      for (int c = 0; c < 4; ++c) {
        v[c] = values[idx[c]];
        if (v[c] > level) code |= 1 << c;
      }
      if (code == 0 || code == 15) continue;

      auto edge_point = [&](int e) {
        const int a = kEdgeCorners[e][0];
        const int b = kEdgeCorners[e][1];
        const double t = (level - v[a]) / (v[b] - v[a]);
        return Eigen::Vector2d(pos[a] + t * (pos[b] - pos[a]));
      };
      auto emit = [&](int e0, int e1) { out.segments.push_back({edge_point(e0), edge_point(e1)}); };

      const bool center_above = 0.25 * (v[0] + v[1] + v[2] + v[3]) > level;
      switch (code) {
        case 1: case 14: emit(3, 0); break;
        case 2: case 13: emit(0, 1); break;
        case 3: case 12: emit(3, 1); break;
        case 4: case 11: emit(1, 2); break;
        case 6: case 9: emit(0, 2); break;
        case 7: case 8: emit(3, 2); break;
        case 5:
          if (center_above) {
            emit(0, 1);
            emit(2, 3);
          } else {
            emit(3, 0);
            emit(1, 2);
          }
          break;
        case 10:
          if (center_above) {
            emit(3, 0);
            emit(1, 2);
          } else {
            emit(0, 1);
            emit(2, 3);
          }
          break;
        default:
          break;
      }
    }
  }
  return out;
}

}  // namespace pfkit
