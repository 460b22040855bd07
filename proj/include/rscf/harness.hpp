#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "scenario.hpp"
#include "se.hpp"
#include "stats.hpp"

namespace rscf {

enum class SweepVariable { power_split_t, time_instant_n, transmit_power_dbm, num_ues_K, velocity_profile };

inline std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::power_split_t: return "t";
    case SweepVariable::time_instant_n: return "n";
    case SweepVariable::transmit_power_dbm: return "p_dbm";
    case SweepVariable::num_ues_K: return "K";
    case SweepVariable::velocity_profile: return "velocity";
  }
  return "?";
}

/// "equal:10", "worst:40" or "list:0/10/30".
inline VelocityProfile parse_velocity_profile(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("velocity profile '" + s + "' must look like kind:value");
  const std::string kind = s.substr(0, colon), rest = s.substr(colon + 1);
  try {
    if (kind == "equal") return VelocityProfile::equal(std::stod(rest));
    if (kind == "worst") return VelocityProfile::worst_ue_fast(std::stod(rest));
    if (kind == "list") {
      std::vector<double> v;
      std::stringstream ss(rest);
      for (std::string item; std::getline(ss, item, '/');) v.push_back(std::stod(item));
      return VelocityProfile::per_ue(std::move(v));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("velocity profile '" + s + "' has a malformed speed");
  }
  throw ConfigError("unknown velocity profile kind '" + kind + "' (expected equal, worst or list)");
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::power_split_t;
  std::vector<double> grid;
  std::vector<VelocityProfile> velocity_grid;
  ScenarioConfig scenario;
  int time_instant = 10;
  std::vector<SchemePair> schemes{SchemePair{}};
  int realizations = 200;
  int layouts = 1;
  std::uint64_t seed = 1;
  EvaluationOptions eval;
  int threads = 1;

  std::size_t points() const {
    return variable == SweepVariable::velocity_profile ? velocity_grid.size() : grid.size();
  }

  void validate() const {
    require(points() > 0, "sweep: grid must be nonempty");
    if (variable != SweepVariable::velocity_profile)
      for (std::size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], "sweep: grid must be strictly increasing");
    require(realizations >= 1 && layouts >= 1, "sweep: realizations and layouts must be >= 1");
    require(!schemes.empty(), "sweep: at least one scheme pair");
    require(time_instant >= 1, "sweep: time instant must be >= 1");
    if (variable == SweepVariable::num_ues_K)
      require(scenario.velocity.kind != VelocityProfile::Kind::per_ue, "sweep: per-UE speeds cannot follow a K sweep");
  }
};

struct ResultRow {
  std::string variable;
  double value = 0.0;
  std::string value_label;
  SchemePair schemes;
  int L = 0, K = 0, N = 0, n = 0;
  double t = 0.0;
  double p_dbm = 0.0;
  std::string velocity;
  int realizations = 0;
  Estimate sum;
  Estimate common;
  Estimate priv;
  double wall_time_s = 0.0;
  std::string error;
  /// Per-realization sum SE in (layout, realization) order, for paired comparisons.
  std::vector<double> samples;
  std::vector<double> min_common_sinr;
};

/// Config and time instant of one grid point.
struct GridPoint {
  ScenarioConfig cfg;
  int n = 1;
  double value = 0.0;
  std::string label;
};

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline GridPoint grid_point(const SweepSpec& spec, std::size_t i) {
  GridPoint g{spec.scenario, spec.time_instant, 0.0, {}};
  if (spec.variable == SweepVariable::velocity_profile) {
    g.cfg.velocity = spec.velocity_grid[i];
    g.value = static_cast<double>(i);
    g.label = g.cfg.velocity.label();
  } else {
    g.value = spec.grid[i];
    g.label = format_number(g.value);
    switch (spec.variable) {
      case SweepVariable::power_split_t: g.cfg.power_split = g.value; break;
      case SweepVariable::time_instant_n: g.n = static_cast<int>(g.value); break;
      case SweepVariable::transmit_power_dbm: g.cfg.downlink_power_w = dbm_to_watt(g.value); break;
      case SweepVariable::num_ues_K: g.cfg.num_ues = static_cast<int>(g.value); break;
      default: break;
    }
  }
  g.cfg.frame_length = std::max(g.cfg.frame_length, g.n);
  g.cfg.validate();
  require(g.n >= 1 && g.n <= g.cfg.frame_length, "sweep: time instant outside the frame");
  return g;
}

inline PowerParams power_params(const ScenarioConfig& cfg) {
  return {cfg.downlink_power_w, cfg.power_split, cfg.noise_power_w, cfg.num_ues};
}

/// Large-scale situation of one drop.
struct Drop {
  Layout layout;
  LinkStatistics stats;
  AgingCoefficients aging;
};

inline Drop make_drop(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t layout_index) {
  RandomStream rng = RandomStream(seed).substream(StreamTag::layout, {layout_index});
  Drop d;
  d.layout = drop_layout(cfg, rng);
  d.stats = link_statistics(cfg, d.layout);
  d.aging = aging_coefficients(cfg, d.layout.ue_velocities);
  return d;
}

/// One row per (grid point, scheme pair). Channel draws depend only on
/// (seed, layout, realization), so all rows of a sweep are paired.
inline std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < spec.points(); ++i) {
    GridPoint g;
    std::string point_error;
    try {
      g = grid_point(spec, i);
    } catch (const std::exception& e) {
      point_error = e.what();
      g.cfg = spec.scenario;
      g.label = spec.variable == SweepVariable::velocity_profile ? spec.velocity_grid[i].label()
                                                                  : format_number(spec.grid[i]);
    }
    std::vector<Drop> drops;
    if (point_error.empty())
      for (int j = 0; j < spec.layouts; ++j) drops.push_back(make_drop(g.cfg, spec.seed, j));

    for (const auto& sch : spec.schemes) {
      ResultRow row;
      row.variable = to_string(spec.variable);
      row.value = g.value;
      row.value_label = g.label;
      row.schemes = sch;
      row.L = g.cfg.num_aps;
      row.K = g.cfg.num_ues;
      row.N = g.cfg.antennas_per_ap;
      row.n = g.n;
      row.t = g.cfg.power_split;
      row.p_dbm = watt_to_dbm(g.cfg.downlink_power_w);
      row.velocity = g.cfg.velocity.label();
      row.realizations = spec.realizations * spec.layouts;
      row.error = point_error;
      const auto start = std::chrono::steady_clock::now();
      if (row.error.empty()) {
        try {
          RunningStats s, c, p;
          for (int j = 0; j < spec.layouts; ++j) {
            const ChannelSampler sampler(drops[j].stats);
            const auto rho = drops[j].aging.at(g.n);
            const auto est = sum_se_monte_carlo(sampler, rho, power_params(g.cfg), sch, spec.realizations, spec.seed,
                                                j, spec.eval, spec.threads);
            for (const auto& o : est.outcomes) {
              s.add(o.se.total());
              c.add(o.se.common);
              p.add(o.se.priv);
              row.samples.push_back(o.se.total());
              row.min_common_sinr.push_back(o.min_common_sinr);
            }
          }
          row.sum = to_estimate(s);
          row.common = to_estimate(c);
          row.priv = to_estimate(p);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_csv_header(std::ostream& os, bool with_timing) {
  os << "sweep,value,label,common_scheme,private_scheme,L,K,N,n,t,p_dbm,p_w,velocity,realizations,"
        "sum_se,sum_se_stderr,common_se,common_se_stderr,private_se,private_se_stderr";
  if (with_timing) os << ",wall_time_s";
  os << ",error\n";
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline void write_csv_row(std::ostream& os, const ResultRow& r, bool with_timing) {
  const auto f = format_number;
  os << r.variable << ',' << f(r.value) << ',' << csv_escape(r.value_label) << ',' << to_string(r.schemes.common) << ','
     << to_string(r.schemes.priv) << ',' << r.L << ',' << r.K << ',' << r.N << ',' << r.n << ',' << f(r.t) << ','
     << f(r.p_dbm) << ',' << f(dbm_to_watt(r.p_dbm)) << ',' << csv_escape(r.velocity) << ',' << r.realizations << ','
     << f(r.sum.value) << ',' << f(r.sum.std_error) << ',' << f(r.common.value) << ',' << f(r.common.std_error) << ','
     << f(r.priv.value) << ',' << f(r.priv.std_error);
  if (with_timing) os << ',' << f(r.wall_time_s);
  os << ',' << csv_escape(r.error) << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool with_timing = false) {
  write_csv_header(os, with_timing);
  for (const auto& r : rows) write_csv_row(os, r, with_timing);
}

// ---------------------------------------------------------------------------
// Closed-form validation

struct TermCheck {
  double rho = 0.0;
  int k = 0;
  UatfTerm term = UatfTerm::ds_common;
  double closed_form = 0.0;
  Estimate monte_carlo;
  double z() const {
    const double d = closed_form - monte_carlo.value;
    if (monte_carlo.std_error > 0.0) return d / monte_carlo.std_error;
    return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  bool pass(double max_z) const { return std::abs(z()) <= max_z; }
};

struct BoundCheck {
  double rho = 0.0;
  double closed_form = 0.0;
  Estimate monte_carlo;
  bool pass() const { return closed_form <= monte_carlo.value + 2.0 * monte_carlo.std_error; }
};

struct ClosedFormReport {
  std::vector<TermCheck> terms;
  std::vector<BoundCheck> bounds;
  double max_z = 3.0;
  bool ok() const {
    for (const auto& t : terms)
      if (!t.pass(max_z)) return false;
    for (const auto& b : bounds)
      if (!b.pass()) return false;
    return true;
  }
};

struct ValidationSpec {
  ScenarioConfig scenario;
  /// Uniform correlation coefficients to test; empty means the scenario's aging at `time_instant`.
  std::vector<double> rho_values;
  int time_instant = 10;
  int oracle_samples = 200000;
  int bound_realizations = 500;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Compares every DS/INT term with its Monte-Carlo oracle and checks the
/// closed form against the realization-averaged sum SE.
inline ClosedFormReport validate_closed_form(const ValidationSpec& spec) {
  const auto& cfg = spec.scenario;
  cfg.validate();
  const Drop d = make_drop(cfg, spec.seed, 0);
  const ChannelSampler sampler(d.stats);
  const PowerParams pw = power_params(cfg);
  std::vector<std::vector<double>> cases;
  if (spec.rho_values.empty())
    cases.push_back(d.aging.at(spec.time_instant));
  else
    for (double r : spec.rho_values) cases.emplace_back(cfg.num_ues, r);

  ClosedFormReport rep;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& rho = cases[c];
    const double tag = rho.empty() ? 0.0 : rho[0];
    const auto cf = closed_form_sum_se(d.stats, rho, pw);
    const auto oracle = uatf_oracle(sampler, rho, pw, spec.oracle_samples,
                                    RandomStream(spec.seed).substream(StreamTag::oracle, {c}));
    for (int k = 0; k < cfg.num_ues; ++k) {
      rep.terms.push_back({tag, k, UatfTerm::ds_common, cf.terms.ds_common[k], oracle.ds_common[k]});
      rep.terms.push_back({tag, k, UatfTerm::int_common, cf.terms.int_common[k], oracle.int_common[k]});
      rep.terms.push_back({tag, k, UatfTerm::ds_private, cf.terms.ds_private[k], oracle.ds_private[k]});
      rep.terms.push_back({tag, k, UatfTerm::int_private, cf.terms.int_private[k], oracle.int_private[k]});
    }
    if (spec.bound_realizations > 0) {
      const auto mc = sum_se_monte_carlo(sampler, rho, pw, SchemePair{}, spec.bound_realizations, spec.seed, 0, {},
                                         spec.threads);
      rep.bounds.push_back({tag, cf.sum_se, mc.sum});
    }
  }
  return rep;
}

}  // namespace rscf
