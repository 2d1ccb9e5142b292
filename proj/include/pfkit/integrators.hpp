#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfkit/ode.hpp"

namespace pfkit {

enum class Method { feuler, ssp2, ssp104, sts1, sts2 };

std::string to_string(Method m);
Method method_from_string(const std::string& name);
/// Classical order of the method.
int method_order(Method m);
bool is_sts(Method m);

/// Relative/absolute tolerances for the phase block and the field block.
struct Tolerances {
  double phase_rel = 1e-4;
  double phase_abs = 1e-4;
  double field_rel = 1e-4;
  double field_abs = 1e-4;
};

/// Projects every cell of the phase block onto the Gibbs simplex.
void project_simplex(const Layout& layout, Eigen::ArrayXd& u);

Eigen::ArrayXd feuler_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, RhsCounter& counter);

/// Low-storage SSPRK(n,2). If `stage_rhs` is given it receives the n stage
/// derivatives in order.
Eigen::ArrayXd ssp2_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, int stages,
                         RhsCounter& counter, std::vector<Eigen::ArrayXd>* stage_rhs = nullptr);

/// Ketcheson's SSPRK(10,4) with one extra storage vector.
Eigen::ArrayXd ssp104_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, RhsCounter& counter,
                           std::vector<Eigen::ArrayXd>* stage_rhs = nullptr);

/// Runge-Kutta-Legendre coefficients. Vectors are indexed by stage j = 0..s;
/// index 0 is unused.
struct StsCoeffs {
  int stages = 0;
  int order = 0;
  std::vector<double> mu;
  std::vector<double> nu;
  std::vector<double> mu_tilde;
  std::vector<double> gamma_tilde;
};

StsCoeffs sts_coeffs(int stages, int order);

struct StsResult {
  Eigen::ArrayXd state;
  /// Initial derivative as used by the recurrence, after the simplex fixup.
  Eigen::ArrayXd rhs0;
};

StsResult sts_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, const StsCoeffs& coeffs,
                   RhsCounter& counter);

/// Replaces the initial derivative with (S(u1) - u0) / (mu1 dt) in every
/// cell whose raw first stage left [0, 1]. Other entries are unchanged.
Eigen::ArrayXd sts2_simplex_fixup(const Layout& layout, const Eigen::ArrayXd& u0,
                                  const Eigen::ArrayXd& u1_raw, const Eigen::ArrayXd& rhs0,
                                  double mu1_dt);

/// Two-stage error estimate from the endpoint values and derivatives.
/// Phase components whose trapezoidal trial value leaves [0, 1] get 0.
Eigen::ArrayXd sommeijer_error(const Layout& layout, const Eigen::ArrayXd& u_n,
                               const Eigen::ArrayXd& u_np1, const Eigen::ArrayXd& rhs_n,
                               const Eigen::ArrayXd& rhs_np1, double dt);

/// Weighted l2 norm over nontrivial degrees of freedom. Phase slots count
/// only when their error is nonzero; a cell without any counts as 2.
double weighted_error_norm(const Layout& layout, const Eigen::ArrayXd& errors,
                           const Eigen::ArrayXd& u_n, const Eigen::ArrayXd& u_np1,
                           const Tolerances& tol);

/// Difference weights d_j = b_j - bhat_j of an embedded pair. The estimate is
/// dt * sum_j d_j F(y_j); `order` is the order of the lower solution.
struct EmbeddedTable {
  std::vector<double> weights;
  int order = 1;
};

/// Forward Euler embedded in SSPRK(n,2): b_j = 1/n, bhat = (1, 0, ..., 0).
EmbeddedTable ssp2_euler_pair(int stages);

struct StepSpec {
  Method method = Method::feuler;
  int ssp_stages = 5;
  int sts_stages = 0;  // used for STS methods, must be set by the caller
  bool adaptive = false;
  Tolerances tol;
  const EmbeddedTable* embedded = nullptr;
};

struct StepOutcome {
  Eigen::ArrayXd state;
  double error = 0.0;
  bool accepted = true;
  long long rhs_evals = 0;
  /// Order of the error estimate used by the controller.
  int estimate_order = 1;
};

/// One attempt with the configured method. In adaptive mode the error comes
/// from the Sommeijer estimator (STS), the embedded table if given, or step
/// halving otherwise; accepted iff error < 1.
StepOutcome attempt_step(OdeSystem& sys, const Eigen::ArrayXd& u, double dt, const StepSpec& spec,
                         RhsCounter& counter);

}  // namespace pfkit
