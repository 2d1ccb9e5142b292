#include "pfkit/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pfkit/kks_system.hpp"

namespace pfkit {

std::string to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::embedding: return "embedding";
    case BenchmarkId::triple_junction: return "triple-junction";
    case BenchmarkId::single_grain: return "single-grain";
    case BenchmarkId::stefan: return "stefan";
  }
  return "?";
}

BenchmarkId benchmark_from_string(const std::string& name) {
  if (name == "embedding") return BenchmarkId::embedding;
  if (name == "triple-junction" || name == "triple_junction") return BenchmarkId::triple_junction;
  if (name == "single-grain" || name == "single_grain") return BenchmarkId::single_grain;
  if (name == "stefan") return BenchmarkId::stefan;
  throw std::invalid_argument("unknown benchmark: " + name);
}

namespace {

constexpr double kPi = std::numbers::pi;

Index scaled(double length, double dx) { return static_cast<Index>(std::lround(length / dx)); }

PhysicalParams two_phase_alloy(double width, double diffusivity, double k) {
  PhysicalParams p = PhysicalParams::uniform(2, 1.0, 1.0, width, diffusivity, k, 0.0);
  p.equilibrium_concentration << 0.02, 0.98;
  return p;
}

}  // namespace

BenchmarkSpec default_spec(BenchmarkId id, double dx, bool refinement) {
  if (!(dx > 0.0)) throw std::invalid_argument("dx must be positive");
  BenchmarkSpec s;
  s.id = id;
  s.dx = dx;
  switch (id) {
    case BenchmarkId::embedding: {
      const double width = refinement ? refinement_width(dx) : 3.0;
      s.extents = {scaled(128, dx), scaled(128, dx)};
      s.boundaries = {Boundary::periodic, Boundary::periodic};
      s.params = two_phase_alloy(width, 100.0, 500.0);
      s.radius = 32.0;
      const double tau = 128.0 * 128.0 / 100.0;
      s.output_interval = tau / 20.0;
      s.t_end = 40.0 * tau;
      s.detect_equilibrium = true;
      s.equilibrium_window = 2.0 * tau;
      s.equilibrium_threshold = 1e-14;
      break;
    }
    case BenchmarkId::triple_junction: {
      const double width = refinement ? refinement_width(dx) : 3.0;
      s.extents = {scaled(96, dx), scaled(192, dx)};
      s.boundaries = {Boundary::zero_gradient, Boundary::periodic};
      s.params = PhysicalParams::uniform(3, 1.0, 1.0, width, 100.0, 500.0, 0.98);
      s.params.interface_energy(0, 2) = s.params.interface_energy(2, 0) = 2.0;
      s.params.interface_energy(1, 2) = s.params.interface_energy(2, 1) = 2.0;
      s.params.equilibrium_concentration[2] = 0.02;
      s.radius = 32.0;
      const double tau = 192.0 * 192.0 / 100.0;
      s.output_interval = tau / 20.0;
      s.t_end = 80.0 * tau;
      s.detect_equilibrium = true;
      s.equilibrium_window = 2.0 * tau;
      s.equilibrium_threshold = 1e-11;
      break;
    }
    case BenchmarkId::single_grain: {
      const double width = refinement ? refinement_width(dx) : 2.5;
      s.extents = {scaled(256, dx), scaled(256, dx)};
      s.boundaries = {Boundary::periodic, Boundary::periodic};
      s.params = PhysicalParams::uniform(2, 1.0, 1.0, width, 1.0, 1.0, 0.5);
      s.capacity = 2;
      s.radius = 110.0;
      s.t_end = 5750.0;
      s.output_interval = 50.0;
      break;
    }
    case BenchmarkId::stefan: {
      const double width = refinement ? refinement_width(dx) : 2.5;
      s.extents = {scaled(1800, dx)};
      s.boundaries = {Boundary::dirichlet};
      s.params = two_phase_alloy(width, 1.0, 1.0);
      const double gap = s.params.equilibrium_concentration[1] - s.params.equilibrium_concentration[0];
      const double L = thin_interface_mobility(1.0, 1.0, width, gap);
      Eigen::MatrixXd m = Eigen::MatrixXd::Constant(2, 2, L);
      m.diagonal().setZero();
      s.params.mobility_override = m;
      s.capacity = 2;
      s.height = 400.0;
      s.far_alpha = 0.2;
      s.far_beta = 0.98;
      s.t_end = 43e3;
      s.output_interval = 500.0;
      break;
    }
  }
  return s;
}

State build(const BenchmarkSpec& spec) {
  switch (spec.id) {
    case BenchmarkId::embedding: return build_embedding(spec);
    case BenchmarkId::triple_junction: return build_triple_junction(spec);
    case BenchmarkId::single_grain: return build_single_grain(spec);
    case BenchmarkId::stefan: return build_stefan(spec);
  }
  throw std::logic_error("unreachable");
}

namespace {

Grid make_grid(const BenchmarkSpec& spec) { return Grid(spec.extents, spec.dx, spec.boundaries); }

void check_disk(const Grid& g, double r, double width) {
  if (g.dims() != 2) throw std::invalid_argument("benchmark needs a 2D grid");
  const double reach = r + 0.5 * kPi * width;
  for (int a = 0; a < 2; ++a) {
    if (reach > 0.5 * g.length(a)) throw std::invalid_argument("disk does not fit the domain");
  }
}

double disk_distance(const Grid& g, Index cell, double r) {
  const Eigen::Vector3d x = g.center(cell);
  const Eigen::Vector2d c(0.5 * g.length(0), 0.5 * g.length(1));
  return r - (x.head<2>() - c).norm();
}

ScalarField local_equilibrium(const Grid& g, const Eigen::ArrayXXd& dense, const PhysicalParams& p) {
  ScalarField c(g);
  for (Index i = 0; i < g.cells(); ++i) {
    double sum = 0.0;
    for (int a = 0; a < dense.rows(); ++a) sum += dense(a, i) * p.equilibrium_concentration[a];
    c[i] = sum;
  }
  return c;
}

}  // namespace

State build_embedding(const BenchmarkSpec& spec) {
  const Grid g = make_grid(spec);
  const double W = spec.params.width;
  check_disk(g, spec.radius, W);
  Eigen::ArrayXXd dense(2, g.cells());
  for (Index i = 0; i < g.cells(); ++i) {
    dense(0, i) = profile(disk_distance(g, i, spec.radius), W);
    dense(1, i) = 1.0 - dense(0, i);
  }
  State s;
  s.phases = SparsePhaseField::from_dense(g, spec.capacity, dense);
  s.concentration = local_equilibrium(g, dense, spec.params);
  const auto& c0 = spec.params.equilibrium_concentration;
  concentration_shift(s, sharp_solute(g, spec.radius, c0[0], c0[1]));
  return s;
}

Eigen::VectorXd rescale_grains(const Eigen::VectorXd& grains, double total) {
  const Index n = grains.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  // phi'_k / phi'_{k+1} = phi_k / phi_{k+1}, multiplied through by the divisor.
  for (Index k = 0; k + 1 < n; ++k) {
    m(k, k) = grains[k + 1];
    m(k, k + 1) = -grains[k];
  }
  m.row(n - 1).setOnes();
  rhs[n - 1] = total;
  return m.partialPivLu().solve(rhs);
}

State build_triple_junction(const BenchmarkSpec& spec) {
  const Grid g = make_grid(spec);
  const double W = spec.params.width;
  check_disk(g, spec.radius, W);
  const double cx = 0.5 * g.length(0);
  Eigen::ArrayXXd dense(3, g.cells());
  for (Index i = 0; i < g.cells(); ++i) {
    const double alpha = profile(disk_distance(g, i, spec.radius), W);
    const double left = profile(cx - g.center(i).x(), W);
    Eigen::VectorXd grains(2);
    grains << left, 1.0 - left;
    grains = rescale_grains(grains, 1.0 - alpha);
    dense(0, i) = grains[0];
    dense(1, i) = grains[1];
    dense(2, i) = alpha;
  }
  State s;
  s.phases = SparsePhaseField::from_dense(g, spec.capacity, dense);
  s.concentration = local_equilibrium(g, dense, spec.params);
  const auto& c0 = spec.params.equilibrium_concentration;
  concentration_shift(s, sharp_solute(g, spec.radius, c0[2], c0[0]));
  return s;
}

State build_single_grain(const BenchmarkSpec& spec) {
  const Grid g = make_grid(spec);
  const double W = spec.params.width;
  check_disk(g, spec.radius, W);
  Eigen::ArrayXXd dense(2, g.cells());
  for (Index i = 0; i < g.cells(); ++i) {
    dense(0, i) = profile(disk_distance(g, i, spec.radius), W);
    dense(1, i) = 1.0 - dense(0, i);
  }
  State s;
  s.phases = SparsePhaseField::from_dense(g, spec.capacity, dense);
  return s;
}

State build_stefan(const BenchmarkSpec& spec) {
  const Grid g = make_grid(spec);
  if (g.dims() != 1) throw std::invalid_argument("Stefan benchmark needs a 1D grid");
  const double W = spec.params.width;
  Eigen::ArrayXXd dense(2, g.cells());
  ScalarField c(g);
  for (Index i = 0; i < g.cells(); ++i) {
    const double beta = profile(spec.height - g.center(i).x(), W);
    dense(0, i) = 1.0 - beta;
    dense(1, i) = beta;
    c[i] = dense(0, i) * spec.far_alpha + beta * spec.far_beta;
  }
  c.set_dirichlet(0, 0, spec.far_beta);
  c.set_dirichlet(0, 1, spec.far_alpha);
  State s;
  s.phases = SparsePhaseField::from_dense(g, spec.capacity, dense);
  s.concentration = std::move(c);
  return s;
}

void concentration_shift(State& state, double target) {
  if (!state.concentration) throw std::invalid_argument("state has no concentration field");
  const Grid& g = state.grid();
  const double volume = g.cell_volume() * static_cast<double>(g.cells());
  state.concentration->values() += (target - integrate(*state.concentration)) / volume;
}

double sharp_solute(const Grid& grid, double radius, double c_inner, double c_outer) {
  const double volume = grid.cell_volume() * static_cast<double>(grid.cells());
  const double inner = kPi * radius * radius;
  return inner * c_inner + (volume - inner) * c_outer;
}

double laplace_pressure(const State& state, const PhysicalParams& p, int inner, int outer) {
  const double mu = chemical_potential(state, p).mean();
  return grand_potential(mu, outer, p) - grand_potential(mu, inner, p);
}

double equivalent_radius(const State& state, int phase) {
  return std::sqrt(integrate(state.grid(), state.phases.phase(phase)) / kPi);
}

double laplace_error(const State& state, const PhysicalParams& p, int inner, int outer) {
  const double gamma = p.interface_energy(inner, outer);
  return std::abs(gamma / equivalent_radius(state, inner) - laplace_pressure(state, p, inner, outer));
}

double theta_eq(double gamma_bb, double gamma_ab) {
  if (!(gamma_bb <= 2.0 * gamma_ab) || gamma_bb < 0.0) {
    throw std::domain_error("no equilibrium angle for these interface energies");
  }
  return 2.0 * std::acos(gamma_bb / (2.0 * gamma_ab));
}

double vesica_angle(double short_extent, double long_extent) {
  return 4.0 * std::atan(short_extent / long_extent);
}

namespace {

// Entry and exit of the level set along a line of samples.
std::pair<double, double> span_crossings(const Eigen::ArrayXd& line, double h) {
  const double first = linear_crossing(line, h);
  const Eigen::ArrayXd rev = line.reverse();
  const double last = static_cast<double>(line.size() - 1) * h - linear_crossing(rev, h);
  return {first, last};
}

}  // namespace

double dihedral_angle(const State& state, int phase, AngleMethod method) {
  const Grid& g = state.grid();
  if (g.dims() != 2) throw std::invalid_argument("dihedral angle needs a 2D grid");
  const Eigen::ArrayXd phi = state.phases.phase(phase);
  const Index nx = g.extent(0);
  const Index ny = g.extent(1);
  if (method == AngleMethod::contour) {
    const ContourSegmentSet set = marching_squares(g, phi, 0.5);
    if (set.empty()) throw NoCrossingError("phase has no 0.5 contour");
    const Eigen::Vector4d b = set.bounds();
    return vesica_angle(b[2] - b[0], b[3] - b[1]);
  }
  // Lines through the domain center; with an even extent they sit between
  // two rows of cells, so the two rows are averaged.
  auto row = [&](Index j) {
    Eigen::ArrayXd r(nx);
    for (Index i = 0; i < nx; ++i) r[i] = phi[g.index({i, j, 0})];
    return r;
  };
  auto column = [&](Index i) {
    Eigen::ArrayXd c(ny);
    for (Index j = 0; j < ny; ++j) c[j] = phi[g.index({i, j, 0})];
    return c;
  };
  const Eigen::ArrayXd across =
      ny % 2 == 0 ? Eigen::ArrayXd(0.5 * (row(ny / 2 - 1) + row(ny / 2))) : row(ny / 2);
  const Eigen::ArrayXd along =
      nx % 2 == 0 ? Eigen::ArrayXd(0.5 * (column(nx / 2 - 1) + column(nx / 2))) : column(nx / 2);
  const auto [x0, x1] = span_crossings(across, g.spacing());
  const auto [y0, y1] = span_crossings(along, g.spacing());
  return vesica_angle(x1 - x0, y1 - y0);
}

bool equilibrium_detect(const std::vector<std::pair<double, double>>& history, double window,
                        double threshold) {
  if (history.size() < 2) return false;
  const double t_last = history.back().first;
  if (t_last - history.front().first < window) return false;
  double st = 0.0, sv = 0.0, n = 0.0;
  for (auto it = history.rbegin(); it != history.rend() && t_last - it->first <= window; ++it) {
    st += it->first;
    sv += it->second;
    n += 1.0;
  }
  if (n < 2.0) return false;
  const double tm = st / n;
  const double vm = sv / n;
  double num = 0.0, den = 0.0;
  for (auto it = history.rbegin(); it != history.rend() && t_last - it->first <= window; ++it) {
    num += (it->first - tm) * (it->second - vm);
    den += (it->first - tm) * (it->first - tm);
  }
  if (!(den > 0.0)) return false;
  return std::abs(num / den) < threshold;
}

bool equilibrium_detect_pressure(const std::vector<std::pair<double, double>>& history,
                                 double window) {
  return equilibrium_detect(history, window, 1e-14);
}

bool equilibrium_detect_angle(const std::vector<std::pair<double, double>>& history,
                              double window) {
  return equilibrium_detect(history, window, 1e-11);
}

double stefan_growth_constant(double D, double c_alpha, double c_beta, double c_ab, double c_ba) {
  if (c_ba == c_ab) throw std::invalid_argument("interface concentrations must differ");
  const double gap = c_ba - c_ab;
  const double s4 = std::sqrt(4.0 * D);
  const double pre = std::sqrt(4.0 * D / kPi);
  auto residual = [&](double A) {
    const double z = A / s4;
    const double ex = std::exp(-z * z);
    return A - pre * ((c_alpha - c_ab) / gap * ex / std::erfc(z) +
                      (c_beta - c_ba) / gap * ex / std::erfc(-z));
  };
  double lo = -4.0 * std::sqrt(D);
  double hi = 4.0 * std::sqrt(D);
  double flo = residual(lo);
  double fhi = residual(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw std::domain_error("growth constant not bracketed");
  // Secant steps, falling back to bisection when they leave the bracket.
  for (int it = 0; it < 200; ++it) {
    double x = hi - fhi * (hi - lo) / (fhi - flo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = residual(x);
    if (std::abs(fx) < 1e-12 || hi - lo < 1e-15) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    const double mid = 0.5 * (lo + hi);
    const double fm = residual(mid);
    if (std::abs(fm) < 1e-12) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double stefan_fit(const std::vector<std::pair<double, double>>& samples) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& [t, x] : samples) {
    if (!(t > 0.0)) continue;
    num += x * std::sqrt(t);
    den += t;
  }
  if (!(den > 0.0)) throw std::invalid_argument("no samples with t > 0");
  return num / den;
}

double interface_position(const State& state, int phase) {
  const Grid& g = state.grid();
  const Eigen::ArrayXd phi = state.phases.phase(phase);
  if (g.dims() == 1) return half_crossing(phi, g.spacing()) + 0.5 * g.spacing();
  Eigen::ArrayXd line(g.extent(0));
  for (Index i = 0; i < g.extent(0); ++i) line[i] = phi[g.index({i, 0, 0})];
  return half_crossing(line, g.spacing()) + 0.5 * g.spacing();
}

double mean_rate(const std::vector<std::pair<double, double>>& s) {
  const std::size_t n = s.size();
  if (n < 3) throw std::invalid_argument("need at least three samples");
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s[i].first > 0.0)) continue;
    // Three-point stencils on possibly uneven spacing.
    std::size_t a, b, c;
    if (i == 0) { a = 0; b = 1; c = 2; }
    else if (i == n - 1) { a = n - 3; b = n - 2; c = n - 1; }
    else { a = i - 1; b = i; c = i + 1; }
    const double ta = s[a].first, tb = s[b].first, tc = s[c].first, t = s[i].first;
    const double da = ((t - tb) + (t - tc)) / ((ta - tb) * (ta - tc));
    const double db = ((t - ta) + (t - tc)) / ((tb - ta) * (tb - tc));
    const double dc = ((t - ta) + (t - tb)) / ((tc - ta) * (tc - tb));
    sum += da * s[a].second + db * s[b].second + dc * s[c].second;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no samples with t > 0");
  return sum / count;
}

double observable(const BenchmarkSpec& spec, const State& state) {
  switch (spec.id) {
    case BenchmarkId::embedding: return laplace_pressure(state, spec.params, 0, 1);
    case BenchmarkId::triple_junction: return dihedral_angle(state, 2, AngleMethod::centerline);
    case BenchmarkId::single_grain: return integrate(state.grid(), state.phases.phase(0));
    case BenchmarkId::stefan: return interface_position(state, 0) - spec.height;
  }
  return 0.0;
}

}  // namespace pfkit
