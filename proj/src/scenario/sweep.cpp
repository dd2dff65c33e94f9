#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "setloc/scenario.hpp"

namespace setloc::scn {

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "eps_wa") return SweepParameter::EpsWa;
  if (name == "eps_wr") return SweepParameter::EpsWr;
  if (name == "V_Pi0" || name == "marker_area") return SweepParameter::MarkerArea;
  if (name == "eps_v") return SweepParameter::EpsV;
  if (name == "eps_delta") return SweepParameter::EpsDelta;
  throw ConfigError(0, "param", "unknown sweep parameter '" + name + "' (eps_wa, eps_wr, V_Pi0, eps_v, eps_delta)");
}

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::EpsWa: return "eps_wa";
    case SweepParameter::EpsWr: return "eps_wr";
    case SweepParameter::MarkerArea: return "V_Pi0";
    case SweepParameter::EpsV: return "eps_v";
    case SweepParameter::EpsDelta: return "eps_delta";
  }
  return "unknown";
}

void apply_sweep_value(ScenarioConfig& cfg, SweepParameter p, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError(0, "values", "sweep values must be finite and >= 0");
  constexpr double kDeg = geom::kPi / 180.0;
  switch (p) {
    case SweepParameter::EpsWa: cfg.sensor_model.eps_wa = value * kDeg; break;
    case SweepParameter::EpsWr: cfg.sensor_model.eps_wr = value; break;
    case SweepParameter::MarkerArea: cfg.initial.marker_area = value; break;
    case SweepParameter::EpsV: cfg.robot.model.eps_v = value; break;
    case SweepParameter::EpsDelta: cfg.robot.model.eps_delta = value * kDeg; break;
  }
}

std::vector<SweepRow> sensitivity_sweep(const ScenarioConfig& base, SweepParameter parameter,
                                        const std::vector<double>& values, int seeds, int jobs) {
  if (values.empty()) throw ConfigError(0, "values", "at least one sweep value is required");
  if (seeds < 1) throw ConfigError(0, "seeds", "must be >= 1");
  for (double v : values) {
    ScenarioConfig probe = base;
    apply_sweep_value(probe, parameter, v);
    validate_config(probe);
  }

  const std::size_t cells = values.size() * static_cast<std::size_t>(seeds);
  std::vector<std::vector<SweepRow>> results(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      const double value = values[c / static_cast<std::size_t>(seeds)];
      ScenarioConfig cfg = base;
      apply_sweep_value(cfg, parameter, value);
      cfg.seed = base.seed + c % static_cast<std::size_t>(seeds);
      std::string status = "ok";
      RunRecord rec;
      try {
        rec = simulate_run(cfg);
        if (rec.fault) status = "fault at step " + std::to_string(rec.fault->k) + ": " + rec.fault->what;
      } catch (const std::exception& e) {
        status = std::string("error: ") + e.what();
      }
      std::replace(status.begin(), status.end(), ',', ';');
      for (const char* name : {"set", "fastslam"}) {
        const bool wanted = std::string(name) == "set" ? cfg.estimators != EstimatorChoice::FastSlam
                                                       : cfg.estimators != EstimatorChoice::Set;
        if (!wanted) continue;
        const std::string& row_status = std::string(name) == "set" ? status : (status.rfind("error", 0) == 0 ? status : "ok");
        results[c].push_back({value, cfg.seed, name, summarize(rec, name), row_status});
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<SweepRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

}  // namespace setloc::scn
