// Command-line front end: single runs, work-precision sweeps and refinement
// studies over the built-in benchmarks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pfkit/run.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string benchmark;
  std::string integrator;
  std::optional<double> dt_factor;
  std::optional<double> tol_phi_abs, tol_phi_rel, tol_c_abs, tol_c_rel;
  std::optional<double> dx;
  std::optional<double> t_end;
  std::optional<double> output_interval;
  std::optional<int> sts_stages;
  std::optional<int> ssp_stages;
  std::optional<long long> max_steps;
  bool adaptive = false;
  bool refinement = false;
  bool dump_fields = false;
  std::string out;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "flat key = value configuration file");
  app->add_option("--benchmark", o.benchmark, "embedding | triple-junction | single-grain | stefan");
  app->add_option("--integrator", o.integrator, "feuler | ssp2 | ssp104 | sts1 | sts2");
  app->add_option("--dt-factor", o.dt_factor, "fixed step as a multiple of dt_e");
  app->add_flag("--adaptive", o.adaptive, "adaptive step control");
  app->add_option("--tol-phi-abs", o.tol_phi_abs);
  app->add_option("--tol-phi-rel", o.tol_phi_rel);
  app->add_option("--tol-c-abs", o.tol_c_abs);
  app->add_option("--tol-c-rel", o.tol_c_rel);
  app->add_option("--dx", o.dx, "grid spacing");
  app->add_flag("--refinement", o.refinement, "W = 3 dx^0.4 with a fixed physical domain");
  app->add_option("--t-end", o.t_end);
  app->add_option("--output-interval", o.output_interval);
  app->add_option("--sts-stages", o.sts_stages);
  app->add_option("--ssp-stages", o.ssp_stages);
  app->add_option("--max-steps", o.max_steps);
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--dump-fields", o.dump_fields, "write field dumps at output times");
}

pfkit::RunConfig resolve(const Overrides& o) {
  using namespace pfkit;
  RunConfig cfg;
  if (!o.config.empty()) cfg = read_config_file(o.config);
  if (!o.benchmark.empty()) apply_setting(cfg, "benchmark", o.benchmark);
  if (!o.integrator.empty()) apply_setting(cfg, "integrator", o.integrator);
  if (o.adaptive) cfg.integrator.adaptive = true;
  if (o.dt_factor) cfg.integrator.dt_factor = *o.dt_factor;
  if (o.tol_phi_abs) cfg.integrator.tol.phase_abs = *o.tol_phi_abs;
  if (o.tol_phi_rel) cfg.integrator.tol.phase_rel = *o.tol_phi_rel;
  if (o.tol_c_abs) cfg.integrator.tol.field_abs = *o.tol_c_abs;
  if (o.tol_c_rel) cfg.integrator.tol.field_rel = *o.tol_c_rel;
  if (o.dx) cfg.dx = *o.dx;
  if (o.refinement) cfg.refinement = true;
  if (o.t_end) cfg.t_end = *o.t_end;
  if (o.output_interval) cfg.output_interval = *o.output_interval;
  if (o.sts_stages) cfg.integrator.sts_stages = *o.sts_stages;
  if (o.ssp_stages) cfg.integrator.ssp_stages = *o.ssp_stages;
  if (o.max_steps) cfg.max_steps = *o.max_steps;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.dump_fields) cfg.dump_fields = true;
  validate(cfg);
  return cfg;
}

void print_report(const pfkit::BenchmarkReport& r) {
  std::printf("benchmark        %s\n", pfkit::to_string(r.benchmark).c_str());
  std::printf("integrator       %s\n", r.integrator.c_str());
  std::printf("dt_e             %.6g\n", r.dt_e);
  std::printf("final time       %.6g\n", r.final_time);
  std::printf("reference        %.10g\n", r.reference);
  std::printf("measured         %.10g\n", r.measured);
  std::printf("error            %.6g (relative %.4g)\n", r.error, r.relative_error);
  std::printf("rhs evaluations  %lld\n", r.rhs_evals);
  std::printf("steps            %lld accepted, %lld rejected\n", r.accepted, r.rejected);
  if (r.equilibrium) std::printf("equilibrium      reached\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field benchmark runner"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, refine_o;
  auto* run_cmd = app.add_subcommand("run", "run one benchmark");
  add_common(run_cmd, run_o);

  auto* sweep_cmd = app.add_subcommand("sweep", "work-precision sweep over integrator configurations");
  add_common(sweep_cmd, sweep_o);
  std::vector<std::string> sweep_configs;
  sweep_cmd->add_option("--configs", sweep_configs,
                        "integrator config files; default is the built-in preset table");

  auto* refine_cmd = app.add_subcommand("refine", "refinement study with W = 3 dx^0.4");
  add_common(refine_cmd, refine_o);
  std::vector<double> levels{1.0, 0.5, 0.25};
  refine_cmd->add_option("--levels", levels, "grid spacings")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto cfg = resolve(run_o);
      print_report(pfkit::run(cfg).report);
    } else if (*sweep_cmd) {
      const auto base = resolve(sweep_o);
      std::vector<pfkit::IntegratorConfig> configs;
      if (sweep_configs.empty()) {
        configs = pfkit::table2_presets();
      } else {
        for (const auto& path : sweep_configs) configs.push_back(pfkit::read_config_file(path, base).integrator);
      }
      const auto rows = pfkit::work_precision(base, configs);
      pfkit::write_work_precision(std::cout, rows);
      if (!base.out_dir.empty()) {
        std::ofstream os(std::filesystem::path(base.out_dir) / "work_precision.csv");
        pfkit::write_work_precision(os, rows);
      }
    } else if (*refine_cmd) {
      const auto base = resolve(refine_o);
      const auto study = pfkit::refinement_study(base, levels);
      pfkit::write_refinement(std::cout, study);
      std::printf("# converging: %s\n", study.converging ? "yes" : "no");
      if (!base.out_dir.empty()) {
        std::ofstream os(std::filesystem::path(base.out_dir) / "refinement.csv");
        pfkit::write_refinement(os, study);
      }
    }
  } catch (const pfkit::BlowUpError& e) {
    std::fprintf(stderr, "error: %s at step %lld\n", e.what(), e.step());
    return 3;
  } catch (const pfkit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
