// Command-line driver: parameter sweeps, closed-form validation and a
// bisection benchmark. Results go to CSV (stdout unless --out is given).

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <rscf/config_io.hpp>
#include <rscf/rscf.hpp>

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::string out;
  int threads = 1;
  std::optional<double> bisect_eps;
  std::optional<int> bisect_max_iter;
  std::optional<int> inner_max_iter;
  std::optional<double> inner_tol;
  std::string dump_channels;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "master RNG seed (overrides config)");
  app->add_option("--realizations", f.realizations, "Monte-Carlo realizations per point (overrides config)");
  app->add_option("--out", f.out, "output CSV path (default stdout)");
  app->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--bisect-eps", f.bisect_eps, "absolute bisection tolerance (default 1e-3 of the initial bracket)")
      ->check(CLI::PositiveNumber);
  app->add_option("--bisect-max-iter", f.bisect_max_iter, "bisection iteration cap");
  app->add_option("--inner-max-iter", f.inner_max_iter, "feasibility solver iteration cap");
  app->add_option("--inner-tol", f.inner_tol, "feasibility tolerance (relative to problem scale)");
  app->add_option("--dump-channels", f.dump_channels, "write realization 0 of layout 0 as a binary channel dump");
}

rscf::ExperimentConfig resolve(const CommonFlags& f) {
  rscf::ExperimentConfig e = f.config.empty() ? rscf::ExperimentConfig{} : rscf::load_experiment(f.config);
  if (f.seed) e.scenario.rng_seed = *f.seed;
  if (f.realizations) e.realizations = *f.realizations;
  auto& b = e.eval.bisection;
  if (f.bisect_eps) b.epsilon_abs = *f.bisect_eps;
  if (f.bisect_max_iter) b.max_iter = *f.bisect_max_iter;
  if (f.inner_max_iter) b.inner.max_iter = *f.inner_max_iter;
  if (f.inner_tol) b.inner.tol = *f.inner_tol;
  b.validate();
  rscf::require(e.realizations >= 1, "--realizations must be >= 1");
  return e;
}

/// Stdout or a file, kept alive for the duration of a command.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void maybe_dump(const CommonFlags& f, const rscf::ExperimentConfig& e) {
  if (f.dump_channels.empty()) return;
  const auto drop = rscf::make_drop(e.scenario, e.scenario.rng_seed, 0);
  const rscf::ChannelSampler sampler(drop.stats);
  auto rng = rscf::RandomStream(e.scenario.rng_seed).substream(rscf::StreamTag::realization, {0, 0});
  rscf::write_channel_dump(f.dump_channels, rscf::generate_channel_state(sampler, drop.aging, rng));
}

int run_sweep_command(const CommonFlags& f, rscf::SweepVariable var, const std::vector<double>& grid,
                      const std::vector<std::string>& velocities, bool timing) {
  const auto e = resolve(f);
  maybe_dump(f, e);
  rscf::SweepSpec spec;
  spec.variable = var;
  spec.grid = grid;
  for (const auto& v : velocities) spec.velocity_grid.push_back(rscf::parse_velocity_profile(v));
  spec.scenario = e.scenario;
  spec.time_instant = e.time_instant;
  spec.schemes = e.schemes;
  spec.realizations = e.realizations;
  spec.layouts = e.layouts;
  spec.seed = e.scenario.rng_seed;
  spec.eval = e.eval;
  spec.threads = f.threads;
  const auto rows = rscf::run_sweep(spec);
  Output out(f.out);
  rscf::write_csv(out.stream(), rows, timing);
  int failed = 0;
  for (const auto& r : rows)
    if (!r.error.empty()) ++failed;
  if (failed) std::cerr << failed << " row(s) reported errors\n";
  return 0;
}

int run_validate(const CommonFlags& f, const std::vector<double>& rho, int samples, int bound_realizations) {
  const auto e = resolve(f);
  rscf::ValidationSpec spec;
  spec.scenario = e.scenario;
  spec.rho_values = rho;
  spec.time_instant = e.time_instant;
  spec.oracle_samples = samples;
  spec.bound_realizations = bound_realizations;
  spec.seed = e.scenario.rng_seed;
  spec.threads = f.threads;
  const auto rep = rscf::validate_closed_form(spec);
  Output out(f.out);
  auto& os = out.stream();
  const auto num = rscf::format_number;
  os << "check,rho,k,n,term,closed_form,monte_carlo,mc_stderr,z,pass\n";
  for (const auto& t : rep.terms)
    os << "term," << num(t.rho) << ',' << t.k << ',' << spec.time_instant << ',' << rscf::to_string(t.term) << ','
       << num(t.closed_form) << ',' << num(t.monte_carlo.value) << ',' << num(t.monte_carlo.std_error) << ','
       << num(t.z()) << ',' << (t.pass(rep.max_z) ? 1 : 0) << '\n';
  for (const auto& b : rep.bounds)
    os << "bound," << num(b.rho) << ",," << spec.time_instant << ",sum_se," << num(b.closed_form) << ','
       << num(b.monte_carlo.value) << ',' << num(b.monte_carlo.std_error) << ",," << (b.pass() ? 1 : 0) << '\n';
  if (!rep.ok()) {
    std::cerr << "closed-form validation failed\n";
    return 1;
  }
  return 0;
}

int run_bench(const CommonFlags& f, bool timing) {
  const auto e = resolve(f);
  maybe_dump(f, e);
  const auto drop = rscf::make_drop(e.scenario, e.scenario.rng_seed, 0);
  const rscf::ChannelSampler sampler(drop.stats);
  const auto pw = rscf::power_params(e.scenario);
  Output out(f.out);
  auto& os = out.stream();
  const auto num = rscf::format_number;
  os << "private_scheme,realization,iterations,iteration_bound,converged,gamma_max0,epsilon,gamma_min,gamma_max,"
        "selected,min_sinr_bisection,min_sinr_superposition,min_sinr_random,constraint_mults";
  if (timing) os << ",wall_time_s";
  os << '\n';
  int violations = 0;
  for (const auto& sch : e.schemes) {
    rscf::SchemePair pair{rscf::CommonScheme::superposition, sch.priv};
    rscf::InstantEvaluator eval(sampler, drop.aging.at(e.time_instant), pw, pair, e.eval,
                                rscf::calibration_stream(e.scenario.rng_seed, 0));
    for (int r = 0; r < e.realizations; ++r) {
      const auto h0 = rscf::realization_channels(sampler, e.scenario.rng_seed, 0, r);
      const auto csi = rscf::outdated_network_csi(h0, eval.rho(), drop.stats);
      const auto base = eval.precoders(csi);
      const auto start = std::chrono::steady_clock::now();
      const auto res = rscf::bisection_common(csi, base, pw, e.eval.bisection);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const double s_sup = rscf::min_common_sinr(csi, base.v_common, base.v_private, pw);
      auto rnd = rscf::build_precoders(csi, sch.priv, rscf::CommonScheme::random, eval.normalization(), pw);
      const double s_rnd = rscf::min_common_sinr(csi, rnd.v_common, rnd.v_private, pw);
      if (!res.converged || res.iterations > res.iteration_bound()) ++violations;
      os << rscf::to_string(sch.priv) << ',' << r << ',' << res.iterations << ',' << res.iteration_bound() << ','
         << (res.converged ? 1 : 0) << ',' << num(res.gamma_max0) << ',' << num(res.epsilon) << ','
         << num(res.gamma_min) << ',' << num(res.gamma_max) << ',' << rscf::to_string(res.selected) << ','
         << num(res.gamma_star) << ',' << num(s_sup) << ',' << num(s_rnd) << ',' << res.mults;
      if (timing) os << ',' << num(wall);
      os << '\n';
    }
  }
  if (violations) std::cerr << violations << " bisection run(s) missed the termination contract\n";
  return violations ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-splitting cell-free massive MIMO simulator with channel aging"};
  app.require_subcommand(1);

  CommonFlags f;
  bool timing = false;
  std::vector<double> grid;
  std::vector<std::string> velocities;
  std::vector<double> rho{1.0, 0.9, 0.5};
  int oracle_samples = 200000;
  int bound_realizations = 500;

  struct SweepCmd {
    const char* name;
    const char* help;
    rscf::SweepVariable var;
    std::vector<double> defaults;
  };
  const std::vector<SweepCmd> sweeps{
      {"sweep-t", "sum SE against the power-splitting factor", rscf::SweepVariable::power_split_t,
       {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
      {"sweep-n", "sum SE against the time instant", rscf::SweepVariable::time_instant_n,
       {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20}},
      {"sweep-power", "sum SE against the per-AP transmit power (dBm)", rscf::SweepVariable::transmit_power_dbm,
       {3, 8, 13, 18, 23, 28, 33, 38, 43}},
      {"sweep-ues", "sum SE against the number of UEs", rscf::SweepVariable::num_ues_K, {2, 4, 6, 8}},
  };
  std::vector<std::pair<CLI::App*, const SweepCmd*>> sweep_apps;
  for (const auto& s : sweeps) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, f);
    sub->add_option("--grid", grid, "sweep values (space separated)");
    sub->add_flag("--timing", timing, "append a wall_time_s column");
    sweep_apps.emplace_back(sub, &s);
  }
  auto* vel = app.add_subcommand("sweep-velocity", "sum SE under velocity profiles");
  add_common(vel, f);
  vel->add_option("--grid", velocities, "profiles such as equal:10 worst:40 list:0/10/20/30");
  vel->add_flag("--timing", timing, "append a wall_time_s column");

  auto* val = app.add_subcommand("validate-closed-form", "compare closed-form terms with Monte-Carlo oracles");
  add_common(val, f);
  val->add_option("--rho", rho, "uniform correlation coefficients; empty uses the config's aging");
  val->add_option("--samples", oracle_samples, "oracle samples per coefficient")->check(CLI::Range(2, 1 << 30));
  val->add_option("--bound-realizations", bound_realizations, "realizations for the lower-bound check (0 skips)");

  auto* bench = app.add_subcommand("bench-bisection", "per-realization bisection diagnostics");
  add_common(bench, f);
  bench->add_flag("--timing", timing, "append a wall_time_s column");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [sub, s] : sweep_apps)
      if (sub->parsed()) return run_sweep_command(f, s->var, grid.empty() ? s->defaults : grid, {}, timing);
    if (vel->parsed()) {
      if (velocities.empty()) velocities = {"equal:0", "equal:10", "equal:30", "worst:30"};
      return run_sweep_command(f, rscf::SweepVariable::velocity_profile, {}, velocities, timing);
    }
    if (val->parsed()) return run_validate(f, rho, oracle_samples, bound_realizations);
    if (bench->parsed()) return run_bench(f, timing);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}
