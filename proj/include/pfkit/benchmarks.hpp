#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pfkit/contour.hpp"
#include "pfkit/model.hpp"

namespace pfkit {

enum class BenchmarkId { embedding, triple_junction, single_grain, stefan };

std::string to_string(BenchmarkId id);
BenchmarkId benchmark_from_string(const std::string& name);

struct BenchmarkSpec {
  BenchmarkId id = BenchmarkId::embedding;
  std::vector<Index> extents;
  std::vector<Boundary> boundaries;
  double dx = 1.0;
  PhysicalParams params;
  int capacity = 3;
  double radius = 32.0;  // embedding, triple junction, single grain
  double height = 400.0;        // stefan: initial extent of beta
  double far_alpha = 0.2;       // stefan: far-field concentrations
  double far_beta = 0.98;
  double t_end = 1.0;
  double output_interval = 1.0;
  /// Stop once the observable has settled (embedding, triple junction).
  bool detect_equilibrium = false;
  double equilibrium_window = 0.0;
  double equilibrium_threshold = 0.0;
};

/// Interface width of the refinement rule W = 3 dx^0.4.
inline double refinement_width(double dx) { return 3.0 * std::pow(dx, 0.4); }

/// Desk-scale defaults. With `refinement` the physical domain is kept, the
/// cell count scales with 1/dx and W follows the refinement rule.
BenchmarkSpec default_spec(BenchmarkId id, double dx = 1.0, bool refinement = false);

State build(const BenchmarkSpec& spec);
/// Phase 0 is the embedded phase, phase 1 the matrix.
State build_embedding(const BenchmarkSpec& spec);
/// Phases: grain 1, grain 2, alpha. The grain boundary runs along y at the
/// domain center in x.
State build_triple_junction(const BenchmarkSpec& spec);
/// Phase 0 is the inner grain; no concentration field.
State build_single_grain(const BenchmarkSpec& spec);
/// Phase 0 is alpha, phase 1 is beta occupying x < h.
State build_stefan(const BenchmarkSpec& spec);

/// Solves the ratio-preserving system for grain fractions: the ratios
/// phi_k / phi_{k+1} of `grains` are kept and the sum becomes `total`.
Eigen::VectorXd rescale_grains(const Eigen::VectorXd& grains, double total);

/// Uniformly shifts c so that its integral equals `target`.
void concentration_shift(State& state, double target);

/// Sharp-interface solute content: disk of radius r with c0 of `inner`, the
/// rest with c0 of `outer`.
double sharp_solute(const Grid& grid, double radius, double c_inner, double c_outer);

/// Grand-potential difference outer minus inner at the domain-mean
/// chemical potential.
double laplace_pressure(const State& state, const PhysicalParams& p, int inner, int outer);
/// Radius of the disk with the same area as `phase`.
double equivalent_radius(const State& state, int phase);
/// |gamma / r - dpsi| with r the current equivalent radius.
double laplace_error(const State& state, const PhysicalParams& p, int inner, int outer);

double theta_eq(double gamma_bb, double gamma_ab);
double vesica_angle(double short_extent, double long_extent);

enum class AngleMethod { centerline, contour };
/// Dihedral angle 4 atan(S / L) of `phase`; L along y, S along x.
double dihedral_angle(const State& state, int phase, AngleMethod method);

/// Least-squares slope over the trailing `window` of (t, value) samples.
/// True once the history spans the window and |slope| < threshold.
bool equilibrium_detect(const std::vector<std::pair<double, double>>& history, double window,
                        double threshold);
bool equilibrium_detect_pressure(const std::vector<std::pair<double, double>>& history,
                                 double window);
bool equilibrium_detect_angle(const std::vector<std::pair<double, double>>& history,
                              double window);

/// Growth constant of the planar solutal Stefan problem.
double stefan_growth_constant(double D, double c_alpha, double c_beta, double c_ab, double c_ba);
/// One-parameter fit X = A sqrt(t) over samples with t > 0.
double stefan_fit(const std::vector<std::pair<double, double>>& samples);
/// Position of the 0.5 crossing of `phase` along x in physical units.
double interface_position(const State& state, int phase);

/// Mean of second-order finite-difference derivatives dA/dt at samples with t > 0.
double mean_rate(const std::vector<std::pair<double, double>>& samples);

/// Benchmark observable: Laplace pressure, centerline angle, grain area or
/// interface displacement.
double observable(const BenchmarkSpec& spec, const State& state);

}  // namespace pfkit
