#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfkit/benchmarks.hpp"
#include "pfkit/time_loop.hpp"

namespace pfkit {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  BenchmarkId benchmark = BenchmarkId::single_grain;
  IntegratorConfig integrator;
  double dx = 1.0;
  /// W = 3 dx^0.4 and a fixed physical domain.
  bool refinement = false;
  std::optional<double> t_end;
  std::optional<double> output_interval;
  std::optional<bool> detect_equilibrium;
  long long max_steps = 0;
  std::string out_dir;
  bool dump_fields = false;
  /// Recorded only; no benchmark draws random numbers.
  unsigned seed = 0;
};

/// Throws ConfigError on invalid values.
void validate(const RunConfig& cfg);

/// Applies one `key = value` setting. Keys mirror the field names, with the
/// integrator settings flattened (`integrator`, `dt_factor`, `tol_phi_abs`, ...).
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// Reads a flat key-value file; `#` starts a comment.
RunConfig read_config(std::istream& is, RunConfig base = {});
RunConfig read_config_file(const std::string& path, RunConfig base = {});

/// Short label such as "sts2 a_phi=0.01" or "ssp2 dt=4dt_e".
std::string describe(const IntegratorConfig& cfg);

/// Configurations of the integrator table: FE, SSP(5)2, SSP(10)4 reference,
/// fixed and adaptive STS1/STS2.
std::vector<IntegratorConfig> table2_presets();

struct BenchmarkReport {
  BenchmarkId benchmark = BenchmarkId::single_grain;
  std::string integrator;
  std::vector<double> times;        // output frames, t = 0 included
  std::vector<double> observables;
  std::vector<double> energies;
  double reference = 0.0;           // analytic value of the error quantity
  double measured = 0.0;            // measured counterpart
  double error = 0.0;
  double relative_error = 0.0;
  long long rhs_evals = 0;
  long long accepted = 0;
  long long rejected = 0;
  double dt_e = 0.0;
  double final_time = 0.0;
  bool equilibrium = false;

  double rejected_fraction() const {
    const long long n = accepted + rejected;
    return n > 0 ? static_cast<double>(rejected) / static_cast<double>(n) : 0.0;
  }
};

struct RunResult {
  BenchmarkReport report;
  State final_state;
};

/// Runs one benchmark to its termination rule. Writes `series.csv`,
/// `summary.json` and optional field dumps into `out_dir` when it is set.
RunResult run(const RunConfig& cfg);

/// Spec used by `run` after overrides are applied.
BenchmarkSpec resolve_spec(const RunConfig& cfg);

struct WorkPrecisionRow {
  std::string integrator;
  long long rhs_evals = 0;
  double error = 0.0;
  double relative_error = 0.0;
  double speedup = 0.0;  // relative to forward Euler at dt_e
  double rejected_fraction = 0.0;
};

/// Runs every config on one benchmark. The speedup baseline is the forward
/// Euler row at dt = dt_e; it is run in addition if missing.
std::vector<WorkPrecisionRow> work_precision(const RunConfig& base,
                                             const std::vector<IntegratorConfig>& configs);

struct RefinementRow {
  double dx = 0.0;
  double width = 0.0;
  double error = 0.0;
  double relative_error = 0.0;
};

struct RefinementStudy {
  std::vector<RefinementRow> rows;
  /// Errors decrease from the coarsest to the finest level.
  bool converging = false;
};

RefinementStudy refinement_study(const RunConfig& base, const std::vector<double>& levels);

void write_work_precision(std::ostream& os, const std::vector<WorkPrecisionRow>& rows);
void write_refinement(std::ostream& os, const RefinementStudy& study);

}  // namespace pfkit
