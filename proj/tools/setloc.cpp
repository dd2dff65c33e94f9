#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "setloc/scenario.hpp"

namespace fs = std::filesystem;
using namespace setloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFault = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("setloc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("SETLOC_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::string estimator;
  bool fallback = false;
};

scn::ScenarioConfig load(const std::string& path, const Overrides& o) {
  scn::ScenarioConfig cfg = scn::load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.estimator == "set") cfg.estimators = scn::EstimatorChoice::Set;
  if (o.estimator == "fastslam") cfg.estimators = scn::EstimatorChoice::FastSlam;
  if (o.estimator == "both") cfg.estimators = scn::EstimatorChoice::Both;
  if (o.fallback) cfg.fallback_predict = true;
  return cfg;
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  std::ofstream f(probe);
  if (!f) throw ConfigError(0, "out", "output directory '" + out + "' is not writable");
  f.close();
  fs::remove(probe, ec);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError(0, "out", "cannot write " + p.string());
  return f;
}

void print_summary(const scn::RunRecord& rec, const scn::ScenarioConfig& cfg) {
  for (const char* name : {"set", "fastslam"}) {
    const scn::Summary s = scn::summarize(rec, name);
    if (s.steps == 0) continue;
    std::cout << name << ": steps=" << s.steps << " mean_m1=" << scn::format_double(s.mean_m1)
              << " mean_m2=" << scn::format_double(s.mean_m2)
              << " containment_rate=" << scn::format_double(100.0 * s.containment_rate) << "%\n";
  }
  if (cfg.estimators != scn::EstimatorChoice::Set) std::cout << "fastslam degenerate resets: " << rec.fastslam_degenerate << "\n";
  if (rec.diagnostics.faults > 0) std::cout << "set estimator faults recovered: " << rec.diagnostics.faults << "\n";
}

int cmd_run(const std::string& config, const std::string& out, const Overrides& o) {
  const scn::ScenarioConfig cfg = load(config, o);
  const fs::path dir = prepare_out(out);
  std::ofstream geometry = open_out(dir / "geometry.ndjson");
  spdlog::info("running {} steps, seed {}", scn::expand_controls(cfg).size(), cfg.seed);
  const scn::RunRecord rec = scn::simulate_run(cfg, scn::geometry_writer(geometry));
  std::ofstream metrics = open_out(dir / "metrics.csv");
  scn::write_metrics_csv(metrics, rec);
  std::ofstream timing = open_out(dir / "timing.csv");
  scn::write_timing_csv(timing, rec);
  print_summary(rec, cfg);
  if (rec.fault) {
    std::cerr << "error: set estimator fault at step " << rec.fault->k << ": " << rec.fault->what << "\n";
    return kExitFault;
  }
  return kExitOk;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError(0, "values", "not a number: '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError(0, "values", "at least one value is required");
  return values;
}

int cmd_sweep(const std::string& config, const std::string& out, const Overrides& o, const std::string& param,
              const std::string& values, int seeds, int jobs) {
  const scn::ScenarioConfig cfg = load(config, o);
  const scn::SweepParameter p = scn::parse_sweep_parameter(param);
  const std::vector<double> v = parse_values(values);
  const fs::path dir = prepare_out(out);
  const auto rows = scn::sensitivity_sweep(cfg, p, v, seeds, jobs);
  std::ofstream f = open_out(dir / "sweep.csv");
  scn::write_sweep_csv(f, rows);
  int faulted = 0;
  for (const auto& r : rows) faulted += r.status != "ok";
  std::cout << "sweep " << scn::to_string(p) << ": " << rows.size() << " rows";
  if (faulted) std::cout << ", " << faulted << " not ok";
  std::cout << "\n";
  return faulted ? kExitFault : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Set-theoretic localization of a vehicle from infrastructure sensors"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out = "out";
  Overrides o;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string param;
  std::string values;
  int seeds = 1;
  std::string mode = "bicycle";

  auto add_common = [&](CLI::App* sub, bool outputs) {
    sub->add_option("--config", config, "Scenario config file")->required();
    if (!outputs) return;
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--estimator", o.estimator, "set, fastslam or both")->check(CLI::IsMember({"set", "fastslam", "both"}));
    sub->add_flag("--fallback-predict", o.fallback, "Keep predicted sets instead of aborting on an empty intersection");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario and write metrics.csv, timing.csv, geometry.ndjson");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "Sensitivity sweep over one noise parameter");
  add_common(sweep, true);
  sweep->add_option("--param", param, "eps_wa (deg), eps_wr (m), V_Pi0 (m^2), eps_v (m/s), eps_delta (deg)")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--seeds", seeds, "Seeds per value")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  add_common(validate, false);
  CLI::App* dump = app.add_subcommand("dump-defaults", "Print a default scenario config");
  dump->add_option("--mode", mode, "bicycle or omnidirectional")->check(CLI::IsMember({"bicycle", "omnidirectional"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (run->count("--seed") || sweep->count("--seed")) o.seed = seed;

  try {
    if (*run) return cmd_run(config, out, o);
    if (*sweep) return cmd_sweep(config, out, o, param, values, seeds, jobs);
    if (*validate) {
      scn::validate_config(scn::load_config(config));
      std::cout << "ok\n";
      return kExitOk;
    }
    if (*dump) {
      std::cout << scn::dump_config(mode == "bicycle" ? scn::parking_defaults() : scn::omni_defaults());
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EmptySetFault& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFault;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFault;
  }
  return kExitOk;
}
