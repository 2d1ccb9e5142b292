#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <regex>
#include <string>
#include <vector>

#include "pfkit/benchmarks.hpp"
#include "pfkit/integrators.hpp"
#include "pfkit/kks_system.hpp"
#include "pfkit/run.hpp"
#include "pfkit/stepcontrol.hpp"

using namespace pfkit;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

int failures = 0;

void verdict(int n, bool ok, const std::string& what) {
  std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

BenchmarkReport run_quiet(BenchmarkId id, const IntegratorConfig& ic) {
  RunConfig cfg;
  cfg.benchmark = id;
  cfg.integrator = ic;
  const auto r = run(cfg).report;
  info("%-16s %-28s measured %.6g reference %.6g rel %.4f evals %lld rejected %lld", to_string(id).c_str(),
       r.integrator.c_str(), r.measured, r.reference, r.relative_error, r.rhs_evals, r.rejected);
  return r;
}

IntegratorConfig sts2_adaptive(double a_phi) {
  IntegratorConfig c;
  c.method = Method::sts2;
  c.adaptive = true;
  c.tol.phase_abs = a_phi;
  return c;
}

// Criteria 1 and 8 share the run.
BenchmarkReport embedding;

void criterion1() {
  embedding = run_quiet(BenchmarkId::embedding, sts2_adaptive(1e-2));
  const double target = 1.0 / 32.0;
  const double rel = std::abs(embedding.measured - target) / target;
  info("pressure jump %.6g against gamma/r = %.6g, deviation %.4f", embedding.measured, target, rel);
  verdict(1, rel <= 0.02 && embedding.relative_error <= 0.02, "laplace pressure within 2%");
}

void criterion2() {
  const auto r = run_quiet(BenchmarkId::triple_junction, sts2_adaptive(1e-2));
  const double dev = std::abs(r.measured - 151.04 * kDeg) / kDeg;
  info("angle %.3f deg, equilibrium %s, deviation %.3f deg", r.measured / kDeg,
       r.equilibrium ? "detected" : "not detected", dev);
  bool monotone = true;
  for (std::size_t k = 1; k < r.energies.size(); ++k) monotone = monotone && r.energies[k] <= r.energies[k - 1];
  info("triple junction energy %s monotone (not asserted)", monotone ? "is" : "is not");
  verdict(2, dev <= 3.0, "dihedral angle within 3 deg of 151.04");
}

// Criteria 3 and 6 share the runs.
std::vector<std::pair<IntegratorConfig, BenchmarkReport>> grain_runs;

const BenchmarkReport* find_grain(Method m, double factor) {
  for (const auto& [c, r] : grain_runs) {
    if (c.method == m && !c.adaptive && c.dt_factor == factor) return &r;
  }
  return nullptr;
}

void criterion3() {
  bool ok = true;
  for (const auto& c : table2_presets()) {
    try {
      auto r = run_quiet(BenchmarkId::single_grain, c);
      ok = ok && r.relative_error <= 0.04;
      grain_runs.emplace_back(c, r);
    } catch (const std::exception& e) {
      info("%s failed: %s", describe(c).c_str(), e.what());
      ok = false;
    }
  }
  verdict(3, ok, "single grain area rate within 4% for every preset");
}

// Dahlquist u' = -u on [0, 1].
class Decay : public OdeSystem {
 public:
  Layout layout() const override { return Layout{{}, 1}; }
  void rhs(const Eigen::ArrayXd& u, Eigen::ArrayXd& du) override { du = -u; }
};

using Stepper = std::function<Eigen::ArrayXd(OdeSystem&, const Eigen::ArrayXd&, double, RhsCounter&)>;

Stepper stepper(Method m) {
  switch (m) {
    case Method::feuler: return [](OdeSystem& s, const Eigen::ArrayXd& u, double dt, RhsCounter& c) {
        return feuler_step(s, u, dt, c);
      };
    case Method::ssp2: return [](OdeSystem& s, const Eigen::ArrayXd& u, double dt, RhsCounter& c) {
        return ssp2_step(s, u, dt, 5, c);
      };
    case Method::ssp104: return [](OdeSystem& s, const Eigen::ArrayXd& u, double dt, RhsCounter& c) {
        return ssp104_step(s, u, dt, c);
      };
    case Method::sts1:
    case Method::sts2: {
      const auto coeffs = sts_coeffs(9, method_order(m));
      return [coeffs](OdeSystem& s, const Eigen::ArrayXd& u, double dt, RhsCounter& c) {
        return sts_step(s, u, dt, coeffs, c).state;
      };
    }
  }
  return {};
}

double dahlquist_error(Method m, int n) {
  Decay sys;
  Eigen::ArrayXd u = Eigen::ArrayXd::Ones(1);
  RhsCounter c;
  const auto step = stepper(m);
  for (int k = 0; k < n; ++k) u = step(sys, u, 1.0 / n, c);
  return std::abs(u[0] - std::exp(-1.0));
}

void criterion4() {
  struct Case {
    Method m;
    int n;                        // Dahlquist steps on [0, 1]
    std::vector<double> factors;  // PDE steps in units of dt_e
  };
  const std::vector<Case> cases = {{Method::feuler, 200, {1.0, 0.5, 0.25}},
                                   {Method::ssp2, 100, {2.0, 1.0, 0.5}},
                                   {Method::ssp104, 10, {4.0, 2.0, 1.0}},
                                   {Method::sts1, 200, {2.0, 1.0, 0.5}},
                                   {Method::sts2, 100, {1.0, 0.5, 0.25}}};

  // Grain relaxed past the initial layer; the window holds no cell entering or
  // leaving the band 0 < phi < 1.
  auto spec = default_spec(BenchmarkId::single_grain);
  KksSystem warm(build(spec), spec.params);
  const double dt_e = gershgorin_bounds(warm.state(), warm.model(), warm.params()).dt_e();
  const double t0 = 200.0;
  {
    Eigen::ArrayXd u = warm.pack();
    IntegratorConfig c;
    c.method = Method::ssp2;
    LoopOptions o;
    o.t_end = t0;
    integrate(warm, u, 0.0, dt_e, c, o);
  }
  const State start = warm.state();
  const double t1 = t0 + 8.0 * dt_e;
  auto solve = [&](const IntegratorConfig& c) {
    KksSystem sys(start, spec.params);
    Eigen::ArrayXd u = sys.pack();
    LoopOptions o;
    o.t_end = t1;
    integrate(sys, u, t0, dt_e, c, o);
    return Eigen::ArrayXd(sys.state().phases.phase(0));
  };
  IntegratorConfig ref;
  ref.method = Method::ssp104;
  ref.adaptive = true;
  ref.tol = Tolerances{1e-14, 1e-14, 1e-14, 1e-14};
  const Eigen::ArrayXd reference = solve(ref);
  const Eigen::ArrayXd initial = start.phases.phase(0);
  int switches = 0;
  for (Index i = 0; i < initial.size(); ++i) {
    switches += ((initial[i] > 0.0) != (reference[i] > 0.0)) + ((initial[i] < 1.0) != (reference[i] < 1.0));
  }
  info("window [%g, %.4f], %d cells switch between bulk and interface", t0, t1, switches);

  bool ok = switches == 0;
  for (const auto& cs : cases) {
    const int p = method_order(cs.m);
    const double ode = std::log2(dahlquist_error(cs.m, cs.n) / dahlquist_error(cs.m, 2 * cs.n));
    std::vector<double> err;
    for (double f : cs.factors) {
      IntegratorConfig c;
      c.method = cs.m;
      c.dt_factor = f;
      if (is_sts(cs.m)) c.sts_stages = 9;
      err.push_back((solve(c) - reference).abs().maxCoeff());
    }
    const double coarse = std::log2(err[0] / err[1]);
    const double fine = std::log2(err[1] / err[2]);
    info("%-7s expected %d  dahlquist %.3f  pde errors %.2e %.2e %.2e orders %.2f %.2f", to_string(cs.m).c_str(), p,
         ode, err[0], err[1], err[2], coarse, fine);
    ok = ok && std::abs(ode - p) <= 5e-2 && std::abs(fine - p) <= 0.3;
  }
  verdict(4, ok, "temporal orders on dahlquist and the grain case");
}

// Criteria 5 and 6 share the runs.
BenchmarkReport stefan_fe, stefan_sts;

void criterion5() {
  stefan_fe = run_quiet(BenchmarkId::stefan, IntegratorConfig{});
  stefan_sts = run_quiet(BenchmarkId::stefan, sts2_adaptive(1e-2));
  const double a = 0.2412;
  const double e_fe = std::abs(stefan_fe.measured - a) / a;
  const double e_sts = std::abs(stefan_sts.measured - a) / a;
  info("fitted A: euler %.5f (%.4f), sts2 %.5f (%.4f)", stefan_fe.measured, e_fe, stefan_sts.measured, e_sts);
  verdict(5, e_fe <= 0.03 && e_sts <= 0.03, "stefan growth constant within 3%");
}

void criterion6() {
  if (grain_runs.empty()) {
    IntegratorConfig fe;
    IntegratorConfig sts;
    sts.method = Method::sts2;
    sts.dt_factor = 100.0;
    for (const auto& c : {fe, sts}) grain_runs.emplace_back(c, run_quiet(BenchmarkId::single_grain, c));
  }
  if (stefan_fe.rhs_evals == 0) {
    stefan_fe = run_quiet(BenchmarkId::stefan, IntegratorConfig{});
    stefan_sts = run_quiet(BenchmarkId::stefan, sts2_adaptive(1e-2));
  }
  const auto* fe = find_grain(Method::feuler, 1.0);
  const auto* sts = find_grain(Method::sts2, 100.0);
  bool ok = fe != nullptr && sts != nullptr;
  if (ok) {
    const double speedup = static_cast<double>(fe->rhs_evals) / static_cast<double>(sts->rhs_evals);
    const double ratio = sts->error / fe->error;
    info("single grain: sts2 dt=100dt_e speedup %.3f, error ratio %.3f", speedup, ratio);
    ok = speedup >= 5.0 && ratio <= 1.5;
  }
  const double stefan = static_cast<double>(stefan_fe.rhs_evals) / static_cast<double>(stefan_sts.rhs_evals);
  info("stefan: adaptive sts2 speedup %.3f", stefan);
  ok = ok && stefan >= 3.0;
  verdict(6, ok, "rhs count speedups");
}

// Runs selected unit cases and checks that they ran and passed.
bool run_cases(const std::string& binary, const std::string& filter, int expected) {
  const std::string cmd = binary + " --test-case='" + filter + "' 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return false;
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  const int rc = pclose(pipe);
  std::smatch m;
  const std::regex counts(R"(test cases:\s*(\d+)\s*\|\s*(\d+) passed\s*\|\s*(\d+) failed)");
  if (!std::regex_search(out, m, counts)) return false;
  const int passed = std::stoi(m[2]);
  info("%s: %d of %s cases passed", binary.substr(binary.rfind('/') + 1).c_str(), passed, m[1].str().c_str());
  return rc == 0 && passed == expected && std::stoi(m[3]) == 0;
}

void criterion7() {
  bool ok = true;
  ok = run_cases(PFKIT_TEST_MODEL,
                 "membership and idempotence on random vectors,consistency against bisection,"
                 "rates sum to zero in every cell,periodic mass conservation",
                 4) && ok;
  ok = run_cases(PFKIT_TEST_INTEGRATORS,
                 "stability polynomial,stability polynomials match Legendre forms,one step,"
                 "one stage of order one is forward euler",
                 5) && ok;
  ok = run_cases(PFKIT_TEST_STEPCONTROL, "bias bounds and rejection decrease under random sequences,odd and minimal",
                 2) && ok;
  verdict(7, ok, "property suites");
}

void criterion8() {
  if (embedding.energies.empty()) embedding = run_quiet(BenchmarkId::embedding, sts2_adaptive(1e-2));
  const auto& e = embedding.energies;
  bool ok = e.size() > 1;
  std::size_t worst = 0;
  double rise = 0.0;
  for (std::size_t k = 1; k < e.size(); ++k) {
    if (e[k] - e[k - 1] > rise) {
      rise = e[k] - e[k - 1];
      worst = k;
    }
  }
  ok = ok && rise <= 0.0;
  info("%zu frames, energy %.6g -> %.6g, largest rise %.3g at frame %zu", e.size(), e.empty() ? 0.0 : e.front(),
       e.empty() ? 0.0 : e.back(), rise, worst);
  verdict(8, ok, "embedding energy nonincreasing");
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  const std::vector<void (*)()> all = {criterion1, criterion2, criterion3, criterion4,
                                       criterion5, criterion6, criterion7, criterion8};
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.push_back(std::atoi(argv[i]));
  if (chosen.empty()) chosen = {1, 2, 3, 4, 5, 6, 7, 8};
  for (int n : chosen) {
    if (n < 1 || n > 8) {
      std::fprintf(stderr, "no criterion %d\n", n);
      return 2;
    }
    all[n - 1]();
  }
  std::printf("%d of %zu criteria failed\n", failures, chosen.size());
  return failures == 0 ? 0 : 1;
}
