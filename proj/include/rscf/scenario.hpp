#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "core.hpp"
#include "random.hpp"

namespace rscf {

/// Three-slope large-scale propagation model (dB gains, distances in meters).
///
/// Far region (d > d1): reference_db - far_slope * log10(d / 1 km).
/// Middle region (d0 < d <= d1): far value at d1 - mid_slope * log10(d / d1).
/// Near region (d <= d0): flat at the d0 value.
struct PathLossParams {
  double reference_db = -140.7;
  double far_slope_db = 35.0;
  double mid_slope_db = 20.0;
  double d0_m = 10.0;
  double d1_m = 50.0;
  double d_min_m = 1.0;
  /// Log-normal shadowing standard deviation; 0 disables shadowing.
  double shadowing_std_db = 0.0;

  void validate() const {
    require(std::isfinite(reference_db), "path loss: reference_db must be finite");
    require(far_slope_db >= 0.0 && mid_slope_db >= 0.0, "path loss: slopes must be nonnegative");
    require(d_min_m > 0.0 && d0_m > 0.0 && d0_m <= d1_m, "path loss: need 0 < d0 <= d1 and d_min > 0");
    require(shadowing_std_db >= 0.0, "path loss: shadowing std must be nonnegative");
  }
};

/// Large-scale gain in dB at `distance_m`. Distances below d_min are clamped.
inline double path_loss_db(double distance_m, const PathLossParams& p) {
  if (!(distance_m > 0.0) || !std::isfinite(distance_m)) throw GeometryError("invalid geometry");
  const double d = std::max(distance_m, p.d_min_m);
  const double at_d1 = p.reference_db - p.far_slope_db * std::log10(p.d1_m / 1000.0);
  if (d > p.d1_m) return p.reference_db - p.far_slope_db * std::log10(d / 1000.0);
  if (d > p.d0_m) return at_d1 - p.mid_slope_db * std::log10(d / p.d1_m);
  return at_d1 - p.mid_slope_db * std::log10(p.d0_m / p.d1_m);
}

inline double path_loss(double distance_m, const PathLossParams& p) {
  return db_to_linear(path_loss_db(distance_m, p));
}

struct CorrelationModel {
  enum class Kind { uncorrelated, exponential };
  Kind kind = Kind::uncorrelated;
  /// Correlation between adjacent antennas for the exponential model.
  double r = 0.0;

  static CorrelationModel uncorrelated() { return {}; }
  static CorrelationModel exponential(double r) { return {Kind::exponential, r}; }

  void validate() const {
    if (kind == Kind::exponential)
      require(r >= 0.0 && r < 1.0, "correlation: exponential parameter must lie in [0, 1)");
  }
};

/// N x N spatial correlation matrix with trace N * beta.
inline CMat build_correlation(double beta, int antennas, const CorrelationModel& model) {
  require(beta >= 0.0 && std::isfinite(beta), "correlation: beta must be finite and nonnegative");
  require(antennas >= 1, "correlation: need at least one antenna");
  model.validate();
  const Eigen::Index n = antennas;
  if (model.kind == CorrelationModel::Kind::uncorrelated) return beta * CMat::Identity(n, n);
  CMat r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = beta * std::pow(model.r, static_cast<double>(std::abs(i - j)));
  return r;
}

/// How UE speeds are assigned after the drop.
struct VelocityProfile {
  enum class Kind { equal, per_ue, worst_ue_fast };
  Kind kind = Kind::equal;
  double speed_mps = 0.0;
  std::vector<double> speeds;

  static VelocityProfile equal(double v) { return {Kind::equal, v, {}}; }
  static VelocityProfile per_ue(std::vector<double> v) { return {Kind::per_ue, 0.0, std::move(v)}; }
  /// The UE with the weakest aggregate large-scale gain moves at `v`, all others stand still.
  static VelocityProfile worst_ue_fast(double v) { return {Kind::worst_ue_fast, v, {}}; }

  void validate(int num_ues) const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (kind == Kind::per_ue) {
      require(static_cast<int>(speeds.size()) == num_ues, "velocity: per-UE list must have one speed per UE");
      require(std::all_of(speeds.begin(), speeds.end(), ok), "velocity: speeds must be finite and nonnegative");
    } else {
      require(ok(speed_mps), "velocity: speed must be finite and nonnegative");
    }
  }

  std::string label() const;
};

inline std::string VelocityProfile::label() const {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  switch (kind) {
    case Kind::equal:
      return "equal:" + num(speed_mps);
    case Kind::worst_ue_fast:
      return "worst:" + num(speed_mps);
    case Kind::per_ue: {
      std::string s = "list:";
      for (std::size_t i = 0; i < speeds.size(); ++i) s += (i ? "/" : "") + num(speeds[i]);
      return s;
    }
  }
  return {};
}

/// Speeds for every UE given the per-UE sums of large-scale gains.
inline std::vector<double> assign_velocities(const VelocityProfile& profile, const std::vector<double>& beta_sums) {
  const std::size_t k = beta_sums.size();
  switch (profile.kind) {
    case VelocityProfile::Kind::equal:
      return std::vector<double>(k, profile.speed_mps);
    case VelocityProfile::Kind::per_ue:
      return profile.speeds;
    case VelocityProfile::Kind::worst_ue_fast: {
      std::vector<double> v(k, 0.0);
      if (k > 0) {
        const auto worst = std::min_element(beta_sums.begin(), beta_sums.end()) - beta_sums.begin();
        v[static_cast<std::size_t>(worst)] = profile.speed_mps;
      }
      return v;
    }
  }
  return {};
}

struct ScenarioConfig {
  int num_aps = 10;
  int num_ues = 4;
  int antennas_per_ap = 2;
  int frame_length = 20;
  double area_side_m = 250.0;
  double downlink_power_w = dbm_to_watt(23.0);
  double noise_power_w = dbm_to_watt(-96.0);
  double carrier_freq_hz = 2e9;
  double bandwidth_hz = 20e6;
  double sampling_time_s = 67e-6;
  double power_split = 0.5;
  std::uint64_t rng_seed = 1;

  PathLossParams path_loss;
  CorrelationModel correlation;
  VelocityProfile velocity = VelocityProfile::equal(0.0);

  int stacked_dim() const { return num_aps * antennas_per_ap; }

  void validate() const {
    require(num_aps >= 1 && num_ues >= 1 && antennas_per_ap >= 1 && frame_length >= 1,
            "scenario: L, K, N and tau must be >= 1");
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    require(positive(area_side_m), "scenario: area side must be positive");
    require(positive(downlink_power_w) && positive(noise_power_w), "scenario: powers must be positive");
    require(positive(carrier_freq_hz) && positive(bandwidth_hz) && positive(sampling_time_s),
            "scenario: frequencies and times must be positive");
    require(power_split >= 0.0 && power_split <= 1.0, "scenario: power split t must lie in [0, 1]");
    path_loss.validate();
    correlation.validate();
    velocity.validate(num_ues);
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Layout {
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  std::vector<double> ue_velocities;
  /// K x L shadowing realizations in dB (all zero when shadowing is off).
  Grid2<double> shadowing_db;
};

/// Large-scale gain beta_kl in linear scale, shadowing included.
inline double large_scale_gain(const ScenarioConfig& cfg, const Layout& layout, std::size_t k, std::size_t l) {
  const double d = distance(layout.ue_positions[k], layout.ap_positions[l]);
  return db_to_linear(path_loss_db(d, cfg.path_loss) + layout.shadowing_db(k, l));
}

/// Drops APs and UEs i.i.d. uniformly over the square and assigns speeds.
inline Layout drop_layout(const ScenarioConfig& cfg, RandomStream& rng) {
  Layout out;
  const double side = cfg.area_side_m;
  for (int l = 0; l < cfg.num_aps; ++l) out.ap_positions.push_back({rng.uniform(0.0, side), rng.uniform(0.0, side)});
  for (int k = 0; k < cfg.num_ues; ++k) out.ue_positions.push_back({rng.uniform(0.0, side), rng.uniform(0.0, side)});
  out.shadowing_db = Grid2<double>(cfg.num_ues, cfg.num_aps, 0.0);
  if (cfg.path_loss.shadowing_std_db > 0.0)
    for (int k = 0; k < cfg.num_ues; ++k)
      for (int l = 0; l < cfg.num_aps; ++l) out.shadowing_db(k, l) = cfg.path_loss.shadowing_std_db * rng.normal();

  std::vector<double> sums(cfg.num_ues, 0.0);
  for (int k = 0; k < cfg.num_ues; ++k)
    for (int l = 0; l < cfg.num_aps; ++l) sums[k] += large_scale_gain(cfg, out, k, l);
  out.ue_velocities = assign_velocities(cfg.velocity, sums);
  return out;
}

/// Per-(UE, AP) spatial correlation R_kl and beta_kl = tr(R_kl) / N.
struct LinkStatistics {
  Grid2<CMat> R;
  Grid2<double> beta;

  std::size_t num_ues() const { return R.rows(); }
  std::size_t num_aps() const { return R.cols(); }
  int antennas() const { return R.rows() ? static_cast<int>(R(0, 0).rows()) : 0; }

  static LinkStatistics from_correlations(Grid2<CMat> r) {
    LinkStatistics s;
    s.beta = Grid2<double>(r.rows(), r.cols(), 0.0);
    for (std::size_t k = 0; k < r.rows(); ++k)
      for (std::size_t l = 0; l < r.cols(); ++l)
        s.beta(k, l) = r(k, l).trace().real() / static_cast<double>(r(k, l).rows());
    s.R = std::move(r);
    return s;
  }
};

inline LinkStatistics link_statistics(const ScenarioConfig& cfg, const Layout& layout) {
  Grid2<CMat> r(cfg.num_ues, cfg.num_aps);
  for (int k = 0; k < cfg.num_ues; ++k)
    for (int l = 0; l < cfg.num_aps; ++l)
      r(k, l) = build_correlation(large_scale_gain(cfg, layout, k, l), cfg.antennas_per_ap, cfg.correlation);
  return LinkStatistics::from_correlations(std::move(r));
}

/// Statistics where every link has correlation beta * I_N (handy for small analytic cases).
inline LinkStatistics uniform_link_statistics(const Grid2<double>& beta, int antennas,
                                              const CorrelationModel& model = {}) {
  Grid2<CMat> r(beta.rows(), beta.cols());
  for (std::size_t k = 0; k < beta.rows(); ++k)
    for (std::size_t l = 0; l < beta.cols(); ++l) r(k, l) = build_correlation(beta(k, l), antennas, model);
  return LinkStatistics::from_correlations(std::move(r));
}

}  // namespace rscf
