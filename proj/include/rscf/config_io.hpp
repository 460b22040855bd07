#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "harness.hpp"
#include "scenario.hpp"
#include "se.hpp"

namespace rscf {

/// Everything a CLI run needs besides the sweep grid. Loaded from JSON; see
/// README for the schema. Absent keys keep their defaults.
struct ExperimentConfig {
  ScenarioConfig scenario;
  int time_instant = 10;
  std::vector<SchemePair> schemes{SchemePair{}};
  int realizations = 200;
  int layouts = 1;
  EvaluationOptions eval;
};

namespace detail {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline PathLossParams parse_path_loss(const nlohmann::json& j) {
  PathLossParams p;
  detail::read_if(j, "reference_db", p.reference_db);
  detail::read_if(j, "far_slope_db", p.far_slope_db);
  detail::read_if(j, "mid_slope_db", p.mid_slope_db);
  detail::read_if(j, "d0_m", p.d0_m);
  detail::read_if(j, "d1_m", p.d1_m);
  detail::read_if(j, "d_min_m", p.d_min_m);
  detail::read_if(j, "shadowing_std_db", p.shadowing_std_db);
  return p;
}

inline CorrelationModel parse_correlation(const nlohmann::json& j) {
  const std::string model = j.value("model", "uncorrelated");
  if (model == "uncorrelated") return CorrelationModel::uncorrelated();
  if (model == "exponential") return CorrelationModel::exponential(j.value("r", 0.0));
  throw ConfigError("unknown correlation model '" + model + "'");
}

inline VelocityProfile parse_velocity(const nlohmann::json& j) {
  if (j.is_string()) return parse_velocity_profile(j.get<std::string>());
  const std::string profile = j.value("profile", "equal");
  if (profile == "equal") return VelocityProfile::equal(j.value("speed_mps", 0.0));
  if (profile == "worst_ue_fast") return VelocityProfile::worst_ue_fast(j.value("speed_mps", 0.0));
  if (profile == "list") return VelocityProfile::per_ue(j.at("speeds").get<std::vector<double>>());
  throw ConfigError("unknown velocity profile '" + profile + "'");
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  ScenarioConfig c;
  detail::read_if(j, "num_aps", c.num_aps);
  detail::read_if(j, "num_ues", c.num_ues);
  detail::read_if(j, "antennas_per_ap", c.antennas_per_ap);
  detail::read_if(j, "frame_length", c.frame_length);
  detail::read_if(j, "area_side_m", c.area_side_m);
  if (j.contains("downlink_power_dbm")) c.downlink_power_w = dbm_to_watt(j.at("downlink_power_dbm").get<double>());
  if (j.contains("noise_power_dbm")) c.noise_power_w = dbm_to_watt(j.at("noise_power_dbm").get<double>());
  detail::read_if(j, "carrier_freq_hz", c.carrier_freq_hz);
  detail::read_if(j, "bandwidth_hz", c.bandwidth_hz);
  detail::read_if(j, "sampling_time_s", c.sampling_time_s);
  detail::read_if(j, "power_split", c.power_split);
  detail::read_if(j, "rng_seed", c.rng_seed);
  if (j.contains("path_loss")) c.path_loss = parse_path_loss(j.at("path_loss"));
  if (j.contains("correlation")) c.correlation = parse_correlation(j.at("correlation"));
  if (j.contains("velocity")) c.velocity = parse_velocity(j.at("velocity"));
  return c;
}

inline ExperimentConfig parse_experiment(const nlohmann::json& j) {
  ExperimentConfig e;
  try {
    e.scenario = parse_scenario(j);
    detail::read_if(j, "time_instant", e.time_instant);
    detail::read_if(j, "realizations", e.realizations);
    detail::read_if(j, "layouts", e.layouts);
    if (j.contains("schemes")) {
      e.schemes.clear();
      for (const auto& s : j.at("schemes")) e.schemes.push_back(parse_scheme_pair(s.get<std::string>()));
    }
    if (j.contains("precoding")) {
      const auto& p = j.at("precoding");
      detail::read_if(p, "calibration_samples", e.eval.calibration_samples);
      const std::string mr = p.value("mr_normalization", "analytic");
      if (mr == "analytic")
        e.eval.mr_normalization = MrNormalization::analytic;
      else if (mr == "empirical")
        e.eval.mr_normalization = MrNormalization::empirical;
      else
        throw ConfigError("mr_normalization must be analytic or empirical");
    }
    if (j.contains("bisection")) {
      const auto& b = j.at("bisection");
      detail::read_if(b, "epsilon_rel", e.eval.bisection.epsilon_rel);
      detail::read_if(b, "epsilon_abs", e.eval.bisection.epsilon_abs);
      detail::read_if(b, "max_iter", e.eval.bisection.max_iter);
      detail::read_if(b, "inner_max_iter", e.eval.bisection.inner.max_iter);
      detail::read_if(b, "inner_tol", e.eval.bisection.inner.tol);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  e.scenario.validate();
  e.eval.bisection.validate();
  require(e.realizations >= 1 && e.layouts >= 1, "config: realizations and layouts must be >= 1");
  require(e.eval.calibration_samples >= 1, "config: calibration_samples must be >= 1");
  return e;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("config " + path + ": " + ex.what());
  }
  return parse_experiment(j);
}

}  // namespace rscf
