#include "pfkit/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "pfkit/field_io.hpp"
#include "pfkit/kks_system.hpp"
#include "pfkit/stepcontrol.hpp"

namespace pfkit {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad flag for " + key + ": " + v);
}

}  // namespace

void validate(const RunConfig& cfg) {
  const auto& ic = cfg.integrator;
  if (!(cfg.dx > 0.0)) throw ConfigError("dx must be positive");
  if (!ic.adaptive && !(ic.dt_factor > 0.0)) throw ConfigError("dt_factor must be positive");
  if (ic.ssp_stages < 2) throw ConfigError("ssp_stages must be at least 2");
  if (ic.sts_stages) {
    const int min = ic.method == Method::sts2 ? 3 : 1;
    if (*ic.sts_stages < min || *ic.sts_stages % 2 == 0) throw ConfigError("sts_stages must be odd and large enough");
  }
  const auto& t = ic.tol;
  if (!(t.phase_abs > 0.0 && t.phase_rel > 0.0 && t.field_abs > 0.0 && t.field_rel > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (ic.embedded && ic.method != Method::ssp2) throw ConfigError("embedded pair needs ssp2");
  if (cfg.t_end && !(*cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (cfg.output_interval && !(*cfg.output_interval > 0.0)) {
    throw ConfigError("output_interval must be positive");
  }
  if (cfg.max_steps < 0) throw ConfigError("max_steps must be non-negative");
}

void apply_setting(RunConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  auto& ic = cfg.integrator;
  try {
    if (key == "benchmark") cfg.benchmark = benchmark_from_string(v);
    else if (key == "integrator") ic.method = method_from_string(v);
    else if (key == "adaptive") ic.adaptive = to_bool(key, v);
    else if (key == "dt_factor") ic.dt_factor = to_double(key, v);
    else if (key == "ssp_stages") ic.ssp_stages = static_cast<int>(to_double(key, v));
    else if (key == "sts_stages") ic.sts_stages = static_cast<int>(to_double(key, v));
    else if (key == "embedded") ic.embedded = to_bool(key, v);
    else if (key == "initial_dt") ic.initial_dt = to_double(key, v);
    else if (key == "tol_phi_abs") ic.tol.phase_abs = to_double(key, v);
    else if (key == "tol_phi_rel") ic.tol.phase_rel = to_double(key, v);
    else if (key == "tol_c_abs") ic.tol.field_abs = to_double(key, v);
    else if (key == "tol_c_rel") ic.tol.field_rel = to_double(key, v);
    else if (key == "dx") cfg.dx = to_double(key, v);
    else if (key == "refinement") cfg.refinement = to_bool(key, v);
    else if (key == "t_end") cfg.t_end = to_double(key, v);
    else if (key == "output_interval") cfg.output_interval = to_double(key, v);
    else if (key == "detect_equilibrium") cfg.detect_equilibrium = to_bool(key, v);
    else if (key == "max_steps") cfg.max_steps = static_cast<long long>(to_double(key, v));
    else if (key == "out_dir") cfg.out_dir = v;
    else if (key == "dump_fields") cfg.dump_fields = to_bool(key, v);
    else if (key == "seed") cfg.seed = static_cast<unsigned>(to_double(key, v));
    else throw ConfigError("unknown key: " + key);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig read_config(std::istream& is, RunConfig cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig read_config_file(const std::string& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  return read_config(is, std::move(base));
}

std::string describe(const IntegratorConfig& cfg) {
  std::ostringstream os;
  os << to_string(cfg.method);
  if (cfg.method == Method::ssp2 && cfg.ssp_stages != 5) os << "(" << cfg.ssp_stages << ")";
  if (cfg.adaptive) {
    os << " a_phi=" << cfg.tol.phase_abs;
    if (cfg.tol.field_abs != cfg.tol.phase_abs) os << " a_c=" << cfg.tol.field_abs;
    if (cfg.embedded) os << " embedded";
  } else {
    os << " dt=" << cfg.dt_factor << "dt_e";
    if (cfg.sts_stages) os << " s=" << *cfg.sts_stages;
  }
  return os.str();
}

std::vector<IntegratorConfig> table2_presets() {
  std::vector<IntegratorConfig> out;
  auto fixed = [&](Method m, double f) {
    IntegratorConfig c;
    c.method = m;
    c.dt_factor = f;
    out.push_back(c);
  };
  auto adaptive = [&](Method m, double a_phi) {
    IntegratorConfig c;
    c.method = m;
    c.adaptive = true;
    c.tol.phase_abs = a_phi;
    out.push_back(c);
  };
  for (double f : {0.5, 1.0}) fixed(Method::feuler, f);
  for (double f : {0.5, 1.0, 2.0, 4.0}) fixed(Method::ssp2, f);
  {
    IntegratorConfig c;
    c.method = Method::ssp104;
    c.adaptive = true;
    c.tol = Tolerances{1e-14, 1e-14, 1e-14, 1e-14};
    out.push_back(c);
  }
  for (Method m : {Method::sts1, Method::sts2}) {
    for (double f : {1.0, 10.0, 100.0, 200.0}) fixed(m, f);
    for (double a : {1e-2, 1e-3, 1e-4}) adaptive(m, a);
  }
  return out;
}

BenchmarkSpec resolve_spec(const RunConfig& cfg) {
  BenchmarkSpec spec = default_spec(cfg.benchmark, cfg.dx, cfg.refinement);
  if (cfg.t_end) spec.t_end = *cfg.t_end;
  if (cfg.output_interval) spec.output_interval = *cfg.output_interval;
  if (cfg.detect_equilibrium) spec.detect_equilibrium = *cfg.detect_equilibrium;
  return spec;
}

namespace {

void finish_report(const BenchmarkSpec& spec, const State& state, BenchmarkReport& r) {
  const PhysicalParams& p = spec.params;
  constexpr double pi = std::numbers::pi;
  switch (spec.id) {
    case BenchmarkId::embedding: {
      r.reference = p.interface_energy(0, 1) / equivalent_radius(state, 0);
      r.measured = laplace_pressure(state, p, 0, 1);
      break;
    }
    case BenchmarkId::triple_junction: {
      r.reference = theta_eq(p.interface_energy(0, 1), p.interface_energy(0, 2));
      r.measured = dihedral_angle(state, 2, AngleMethod::contour);
      break;
    }
    case BenchmarkId::single_grain: {
      std::vector<std::pair<double, double>> samples;
      for (std::size_t k = 0; k < r.times.size(); ++k) samples.emplace_back(r.times[k], r.observables[k]);
      r.reference = -2.0 * pi * p.mobility(0, 1) * p.interface_energy(0, 1);
      r.measured = mean_rate(samples);
      break;
    }
    case BenchmarkId::stefan: {
      std::vector<std::pair<double, double>> samples;
      for (std::size_t k = 0; k < r.times.size(); ++k) samples.emplace_back(r.times[k], r.observables[k]);
      const auto& c0 = p.equilibrium_concentration;
      r.reference = stefan_growth_constant(p.diffusivity[0], spec.far_alpha, spec.far_beta, c0[0], c0[1]);
      r.measured = stefan_fit(samples);
      break;
    }
  }
  r.error = std::abs(r.measured - r.reference);
  r.relative_error = r.error / std::abs(r.reference);
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  validate(cfg);
  const BenchmarkSpec spec = resolve_spec(cfg);
  KksSystem sys(build(spec), spec.params);
  const EigEstimate eig = gershgorin_bounds(sys.state(), sys.model(), sys.params());
  const double dt_e = eig.dt_e();

  BenchmarkReport rep;
  rep.benchmark = spec.id;
  rep.integrator = describe(cfg.integrator);
  rep.dt_e = dt_e;

  LoopOptions opts;
  opts.t_end = spec.t_end;
  opts.max_steps = cfg.max_steps;
  for (long long k = 1;; ++k) {
    const double t = static_cast<double>(k) * spec.output_interval;
    if (t >= spec.t_end) break;
    opts.output_times.push_back(t);
  }
  opts.output_times.push_back(spec.t_end);

  std::ofstream csv;
  const bool files = !cfg.out_dir.empty();
  if (files) {
    std::filesystem::create_directories(cfg.out_dir);
    csv.open(std::filesystem::path(cfg.out_dir) / "series.csv");
    if (!csv) throw ConfigError("cannot write into " + cfg.out_dir);
    csv << "kind,step,time,dt,accepted,error_estimate,stages,rhs_evals,rejected_before,observable,energy\n";
  }
  int frame = 0;
  auto emit_output = [&](long long step, double t) {
    const State& s = sys.state();
    const double obs = observable(spec, s);
    const double energy = free_energy(s, sys.model(), sys.params());
    rep.times.push_back(t);
    rep.observables.push_back(obs);
    rep.energies.push_back(energy);
    if (files) {
      csv << "output," << step << ',' << fmt(t) << ",,,,,,," << fmt(obs) << ',' << fmt(energy) << '\n';
      if (cfg.dump_fields) {
        char name[32];
        std::snprintf(name, sizeof name, "fields_%04d.txt", frame);
        write_fields((std::filesystem::path(cfg.out_dir) / name).string(), s);
      }
    }
    ++frame;
  };

  emit_output(0, 0.0);
  std::vector<std::pair<double, double>> history{{0.0, rep.observables.back()}};
  Eigen::ArrayXd u = sys.pack();
  auto on_step = [&](const StepRecord& rec, const Eigen::ArrayXd&) {
    if (files) {
      csv << "step," << rec.index << ',' << fmt(rec.time) << ',' << fmt(rec.dt) << ",1," << fmt(rec.error)
          << ',' << rec.stages << ',' << rec.rhs_evals << ',' << rec.rejected_before << ",,\n";
    }
    if (!rec.output) return true;
    sys.state().time = rec.time;
    emit_output(rec.index, rec.time);
    history.emplace_back(rec.time, rep.observables.back());
    if (spec.detect_equilibrium &&
        equilibrium_detect(history, spec.equilibrium_window, spec.equilibrium_threshold)) {
      rep.equilibrium = true;
      return false;
    }
    return true;
  };

  const LoopResult res = integrate(sys, u, 0.0, dt_e, cfg.integrator, opts, on_step);
  sys.unpack(u);
  sys.state().time = res.time;
  rep.rhs_evals = res.rhs_evals;
  rep.accepted = res.accepted;
  rep.rejected = res.rejected;
  rep.final_time = res.time;
  finish_report(spec, sys.state(), rep);

  if (files) {
    nlohmann::json j;
    j["benchmark"] = to_string(rep.benchmark);
    j["integrator"] = rep.integrator;
    j["dx"] = spec.dx;
    j["width"] = spec.params.width;
    j["seed"] = cfg.seed;
    j["dt_e"] = rep.dt_e;
    j["final_time"] = rep.final_time;
    j["reference"] = rep.reference;
    j["measured"] = rep.measured;
    j["error"] = rep.error;
    j["relative_error"] = rep.relative_error;
    j["rhs_evals"] = rep.rhs_evals;
    j["accepted_steps"] = rep.accepted;
    j["rejected_steps"] = rep.rejected;
    j["rejected_fraction"] = rep.rejected_fraction();
    j["equilibrium_reached"] = rep.equilibrium;
    std::ofstream js(std::filesystem::path(cfg.out_dir) / "summary.json");
    js << j.dump(2) << '\n';
  }
  return RunResult{std::move(rep), std::move(sys.state())};
}

std::vector<WorkPrecisionRow> work_precision(const RunConfig& base,
                                             const std::vector<IntegratorConfig>& configs) {
  if (configs.size() < 2) throw ConfigError("work-precision needs at least two configurations");
  auto is_baseline = [](const IntegratorConfig& c) {
    return c.method == Method::feuler && !c.adaptive && c.dt_factor == 1.0;
  };
  std::vector<IntegratorConfig> all = configs;
  if (std::none_of(all.begin(), all.end(), is_baseline)) {
    IntegratorConfig fe;
    all.insert(all.begin(), fe);
  }
  std::vector<WorkPrecisionRow> rows;
  long long baseline = 0;
  for (const auto& ic : all) {
    RunConfig cfg = base;
    cfg.integrator = ic;
    if (!base.out_dir.empty()) {
      std::string label = describe(ic);
      for (char& ch : label) {
        if (ch == ' ' || ch == '=') ch = '_';
      }
      cfg.out_dir = (std::filesystem::path(base.out_dir) / label).string();
    }
    const BenchmarkReport r = run(cfg).report;
    WorkPrecisionRow row;
    row.integrator = r.integrator;
    row.rhs_evals = r.rhs_evals;
    row.error = r.error;
    row.relative_error = r.relative_error;
    row.rejected_fraction = r.rejected_fraction();
    if (is_baseline(ic)) baseline = r.rhs_evals;
    rows.push_back(row);
  }
  for (auto& row : rows) row.speedup = static_cast<double>(baseline) / static_cast<double>(row.rhs_evals);
  return rows;
}

RefinementStudy refinement_study(const RunConfig& base, const std::vector<double>& levels) {
  if (levels.empty()) throw ConfigError("refinement study needs at least one level");
  std::vector<double> sorted = levels;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  RefinementStudy study;
  for (double dx : sorted) {
    RunConfig cfg = base;
    cfg.dx = dx;
    cfg.refinement = true;
    if (!base.out_dir.empty()) cfg.out_dir = (std::filesystem::path(base.out_dir) / ("dx_" + fmt(dx))).string();
    const BenchmarkReport r = run(cfg).report;
    study.rows.push_back({dx, refinement_width(dx), r.error, r.relative_error});
  }
  study.converging = study.rows.size() > 1 && study.rows.back().error < study.rows.front().error;
  return study;
}

void write_work_precision(std::ostream& os, const std::vector<WorkPrecisionRow>& rows) {
  os << "integrator,rhs_evals,error,relative_error,speedup,rejected_fraction\n";
  for (const auto& r : rows) {
    os << r.integrator << ',' << r.rhs_evals << ',' << fmt(r.error) << ',' << fmt(r.relative_error) << ','
       << fmt(r.speedup) << ',' << fmt(r.rejected_fraction) << '\n';
  }
}

void write_refinement(std::ostream& os, const RefinementStudy& study) {
  os << "dx,width,error,relative_error\n";
  for (const auto& r : study.rows) {
    os << fmt(r.dx) << ',' << fmt(r.width) << ',' << fmt(r.error) << ',' << fmt(r.relative_error) << '\n';
  }
}

}  // namespace pfkit
