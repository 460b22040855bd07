// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails. Every tolerance, seed and problem size is pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <rscf/rscf.hpp>

using namespace rscf;

namespace {

constexpr std::uint64_t kSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Estimate paired(const std::vector<double>& a, const std::vector<double>& b) {
  RunningStats s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] - b[i]);
  return to_estimate(s);
}

ScenarioConfig desk_scenario(double speed, double t) {
  ScenarioConfig c;
  c.num_aps = 10;
  c.num_ues = 4;
  c.antennas_per_ap = 2;
  c.power_split = t;
  c.velocity = VelocityProfile::equal(speed);
  return c;
}

// ---------------------------------------------------------------------------

Outcome closed_form_terms() {
  constexpr int kSamples = 200000;
  constexpr double kMaxZ = 3.0;
  constexpr double kBudgetS = 60.0;
  Clock clock;
  ValidationSpec v;
  v.scenario.num_aps = 4;
  v.scenario.num_ues = 2;
  v.scenario.antennas_per_ap = 2;
  v.scenario.correlation = CorrelationModel::uncorrelated();
  v.rho_values = {1.0, 0.9, 0.5};
  v.oracle_samples = kSamples;
  v.bound_realizations = 0;
  v.seed = kSeed;
  const auto rep = validate_closed_form(v);
  double worst = 0.0;
  bool ok = rep.terms.size() == 24;
  for (const auto& t : rep.terms) {
    worst = std::max(worst, std::abs(t.z()));
    ok = ok && t.pass(kMaxZ);
  }
  const double secs = clock.seconds();
  return {ok && secs <= kBudgetS,
          fmt("24 DS/INT terms, max |z| = %.2f (limit 3), %.1f s (limit 60)", worst, secs)};
}

Outcome lower_bound() {
  constexpr int kScenarios = 20;
  constexpr int kRealizations = 500;
  constexpr double kBudgetS = 600.0;
  Clock clock;
  int ok = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < kScenarios; ++s) {
    const auto cfg = desk_scenario(30.0, 0.5);
    const auto drop = make_drop(cfg, kSeed + s, 0);
    const ChannelSampler sampler(drop.stats);
    const auto rho = drop.aging.at(10);
    const auto pw = power_params(cfg);
    const double cf = closed_form_sum_se(drop.stats, rho, pw).sum_se;
    const auto mc = sum_se_monte_carlo(sampler, rho, pw, {}, kRealizations, kSeed + s);
    const double margin = (mc.sum.value + 2.0 * mc.sum.std_error) - cf;
    worst_margin = std::min(worst_margin, margin);
    if (margin >= 0.0) ++ok;
  }
  const double secs = clock.seconds();
  return {ok == kScenarios && secs <= kBudgetS,
          fmt("%.0f/20 scenarios with closed form <= MC + 2 SE, smallest slack %.3f bit/s/Hz, %.1f s", ok,
              worst_margin, secs)};
}

Outcome aging_trend() {
  constexpr int kRealizations = 500;
  std::vector<double> grid;
  for (int n = 1; n <= 20; ++n) grid.push_back(n);
  bool ok = true;
  double worst_step = -std::numeric_limits<double>::infinity();
  double worst_flat = 0.0;
  double drop_total = 0.0;
  for (double t : {0.0, 0.5}) {
    for (double speed : {30.0, 0.0}) {
      SweepSpec s;
      s.variable = SweepVariable::time_instant_n;
      s.grid = grid;
      s.scenario = desk_scenario(speed, t);
      s.realizations = kRealizations;
      s.seed = kSeed;
      const auto rows = run_sweep(s);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto d = paired(rows[i].samples, rows[i - 1].samples);
        if (speed > 0.0) {
          worst_step = std::max(worst_step, d.value - d.std_error);
          ok = ok && d.value <= d.std_error;
        } else {
          const auto f = paired(rows[i].samples, rows[0].samples);
          worst_flat = std::max(worst_flat, std::abs(f.value) - f.std_error);
          ok = ok && std::abs(f.value) <= f.std_error;
        }
      }
      if (speed > 0.0 && t == 0.5) drop_total = rows.front().sum.value - rows.back().sum.value;
    }
  }
  return {ok, fmt("v=30: max(step - SE) = %.3g (must be <= 0), n=1->20 loss %.3f bit/s/Hz at t=0.5; "
                  "v=0: max(|dev| - SE) = %.3g",
                  worst_step, drop_total, worst_flat)};
}

Outcome saturation() {
  constexpr int kRealizations = 500;
  const std::vector<double> powers{13, 23, 33, 43};
  const std::vector<double> splits{0.0, 0.25, 0.5, 0.75, 1.0};
  // mean sum SE per (t, power) at v = 0, superposition common + MR private
  std::vector<std::vector<double>> se(splits.size());
  for (std::size_t i = 0; i < splits.size(); ++i) {
    SweepSpec s;
    s.variable = SweepVariable::transmit_power_dbm;
    s.grid = powers;
    s.scenario = desk_scenario(0.0, splits[i]);
    s.realizations = kRealizations;
    s.seed = kSeed;
    for (const auto& r : run_sweep(s)) se[i].push_back(r.sum.value);
  }
  const double no_rs_low = se[0][1] - se[0][0], no_rs_high = se[0][3] - se[0][2];
  std::vector<double> best(powers.size(), -1.0);
  for (std::size_t p = 0; p < powers.size(); ++p)
    for (std::size_t i = 0; i < splits.size(); ++i) best[p] = std::max(best[p], se[i][p]);
  const double rs_low = best[1] - best[0], rs_high = best[3] - best[2];
  const bool ok = no_rs_low > 0.0 && no_rs_high < 0.25 * no_rs_low && rs_low > 0.0 && rs_high > 0.6 * rs_low;
  return {ok, fmt("no RS: gain 13->23 %.3f, 33->43 %.3f (ratio must be < 0.25); tuned RS: %.3f, %.3f "
                  "(ratio must be > 0.6)",
                  no_rs_low, no_rs_high, rs_low, rs_high)};
}

struct BisectionRecord {
  int iterations = 0, bound = 0;
  bool terminated = false;
  double gap = 0.0, epsilon = 0.0;
};

std::vector<BisectionRecord> g_bisection_runs;

Outcome dominance() {
  constexpr int kRealizations = 500;
  constexpr double kSlack = 1e-9;
  constexpr double kSigmas = 3.0;
  const auto cfg = desk_scenario(10.0, 0.5);
  const auto drop = make_drop(cfg, kSeed, 0);
  const ChannelSampler sampler(drop.stats);
  const auto rho = drop.aging.at(10);
  const auto pw = power_params(cfg);
  const auto norm = mr_normalization(drop.stats, rho);
  std::vector<double> sup, rnd;
  int violations = 0;
  for (int r = 0; r < kRealizations; ++r) {
    const auto csi = outdated_network_csi(realization_channels(sampler, kSeed, 0, r), rho, drop.stats);
    const auto base = build_precoders(csi, PrivateScheme::mr, CommonScheme::superposition, norm, pw);
    const auto random = build_precoders(csi, PrivateScheme::mr, CommonScheme::random, norm, pw);
    const auto res = bisection_common(csi, base, pw);
    const double s_bis = min_common_sinr(csi, res.v_common, base.v_private, pw);
    sup.push_back(min_common_sinr(csi, base.v_common, base.v_private, pw));
    rnd.push_back(min_common_sinr(csi, random.v_common, random.v_private, pw));
    if (s_bis < sup.back() - kSlack) ++violations;
    g_bisection_runs.push_back({res.iterations, res.iteration_bound(), res.converged, res.gamma_max - res.gamma_min,
                                res.epsilon});
  }
  const auto d = paired(sup, rnd);
  const bool ok = violations == 0 && d.value >= kSigmas * d.std_error;
  return {ok, fmt("%.0f/500 realizations below superposition; mean min-SINR gap superposition - random = %.4g "
                  "(%.1f SE, need >= 3)",
                  violations, d.value, d.std_error > 0 ? d.value / d.std_error : INFINITY)};
}

Outcome private_ordering() {
  constexpr int kRealizations = 500;
  constexpr double kSigmas = 3.0;
  SweepSpec s;
  s.variable = SweepVariable::power_split_t;
  s.grid = {0.0};
  s.scenario = desk_scenario(30.0, 0.0);
  s.realizations = kRealizations;
  s.seed = kSeed;
  s.schemes = {{CommonScheme::superposition, PrivateScheme::mr},
               {CommonScheme::superposition, PrivateScheme::local_mmse},
               {CommonScheme::superposition, PrivateScheme::centralized_mmse}};
  const auto rows = run_sweep(s);
  const auto lm = paired(rows[1].samples, rows[0].samples);
  const auto cl = paired(rows[2].samples, rows[1].samples);
  const bool ok = lm.value >= kSigmas * lm.std_error && cl.value >= kSigmas * cl.std_error;
  return {ok, fmt("MR %.3f, LMMSE %.3f, CMMSE %.3f; ", rows[0].sum.value, rows[1].sum.value, rows[2].sum.value) +
                  fmt("gaps LMMSE-MR %.1f SE, CMMSE-LMMSE %.1f SE (need >= 3)", lm.value / lm.std_error,
                      cl.value / cl.std_error)};
}

Outcome bisection_mechanics() {
  // Network runs: the dominance runs plus MMSE privates on a second drop.
  auto runs = g_bisection_runs;
  {
    const auto cfg = desk_scenario(30.0, 0.5);
    const auto drop = make_drop(cfg, kSeed + 1, 0);
    const ChannelSampler sampler(drop.stats);
    const auto rho = drop.aging.at(10);
    const auto pw = power_params(cfg);
    for (auto priv : {PrivateScheme::local_mmse, PrivateScheme::centralized_mmse}) {
      InstantEvaluator ev(sampler, rho, pw, {CommonScheme::superposition, priv}, {}, calibration_stream(kSeed + 1, 0));
      for (int r = 0; r < 50; ++r) {
        const auto csi = outdated_network_csi(realization_channels(sampler, kSeed + 1, 0, r), rho, drop.stats);
        const auto res = bisection_common(csi, ev.precoders(csi), pw);
        runs.push_back({res.iterations, res.iteration_bound(), res.converged, res.gamma_max - res.gamma_min,
                        res.epsilon});
      }
    }
  }
  int bad = 0;
  for (const auto& r : runs)
    if (!r.terminated || r.gap > r.epsilon || r.iterations > r.bound) ++bad;

  // Single-user optima: K = 1 and C = 0, where the best common SINR is
  // p t (sum_l ||h_l||)^2 / sigma^2 with the per-AP matched filter.
  RandomStream rng(kSeed);
  int su_bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const int L = trial < 20 ? 1 : 1 + trial % 5, N = trial < 20 ? 1 : 1 + trial % 3;
    ChannelGrid g(1, L);
    Grid2<CMat> c(1, L, CMat::Zero(N, N));
    double s = 0.0;
    for (int l = 0; l < L; ++l) {
      g(0, l) = rng.uniform(0.1, 3.0) * rng.complex_normal_vector(N);
      s += g(0, l).norm();
    }
    const auto csi = stack_csi(g, c);
    const PowerParams pw{rng.uniform(0.5, 2.0), rng.uniform(0.2, 1.0), rng.uniform(0.1, 1.0), 1};
    PrecoderSet base;
    base.v_private = {CVec::Zero(L * N)};
    base.v_common = CVec::Zero(L * N);
    base.common_degenerate = true;
    const auto res = bisection_common(csi, base, pw);
    const double opt = pw.common_power() * s * s / pw.sigma2;
    worst = std::max(worst, std::abs(res.gamma_star - opt) / res.epsilon);
    if (std::abs(res.gamma_star - opt) > res.epsilon) ++su_bad;
  }
  return {bad == 0 && su_bad == 0,
          fmt("%.0f/%.0f network runs broke termination or the iteration bound; %.0f/40 single-user optima "
              "missed (worst error %.2f eps)",
              bad, static_cast<double>(runs.size()), su_bad, worst)};
}

double j0_reference(double xd) {
  using big = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<60>>;
  const big x(xd), q = x * x / 4;
  big term = 1, sum = 1;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (big(k) * big(k));
    sum += term;
    if (abs(term) < big("1e-45")) break;
  }
  return static_cast<double>(sum);
}

Outcome channel_statistics() {
  constexpr int kDraws = 100000;
  constexpr double kCovTol = 0.02;
  const ScenarioConfig cfg;
  const CMat R = build_correlation(1.0, 2, CorrelationModel::exponential(0.5));
  const CMat Rh = hermitian_sqrt(R);
  double worst_cov = 0.0, worst_cross = 0.0;
  for (int n : {1, 10, 20}) {
    const double rho = temporal_correlation(30.0, cfg.carrier_freq_hz, cfg.sampling_time_s, n);
    RandomStream rng = RandomStream(kSeed).substream({static_cast<std::uint64_t>(n)});
    CMat cov = CMat::Zero(2, 2), cross = CMat::Zero(2, 2);
    for (int i = 0; i < kDraws; ++i) {
      const CVec h0 = Rh * rng.complex_normal_vector(2);
      const CVec h = age_channel(h0, rho, Rh, rng);
      const auto o = outdated_csi(h0, rho, R);
      cov += h * h.adjoint();
      cross += (h - o.h_hat) * o.h_hat.adjoint();
    }
    worst_cov = std::max(worst_cov, (cov / kDraws - R).norm() / R.norm());
    worst_cross = std::max(worst_cross, (cross / kDraws).norm() / R.trace().real());
  }
  double worst_unit = 0.0;
  for (double v = 0.0; v <= 40.0; v += 0.5) {
    const auto a = aging_coefficients(cfg, {v});
    for (int n = 0; n <= cfg.frame_length; ++n)
      worst_unit = std::max(worst_unit, std::abs(a.rho(0, n) * a.rho(0, n) + a.rho_bar(0, n) * a.rho_bar(0, n) - 1.0));
  }
  double worst_j0 = 0.0;
  for (int i = 0; i <= 5000; ++i) worst_j0 = std::max(worst_j0, std::abs(bessel_j0(0.01 * i) - j0_reference(0.01 * i)));
  const bool ok = worst_cov <= kCovTol && worst_cross <= kCovTol && worst_unit <= 1e-12 && worst_j0 <= 1e-10;
  return {ok, fmt("cov error %.4f, cross-cov %.4f (limit 0.02); |rho^2+rho_bar^2-1| %.1e (limit 1e-12); "
                  "J0 error %.1e (limit 1e-10)",
                  worst_cov, worst_cross, worst_unit, worst_j0)};
}

Outcome determinism() {
  SweepSpec s;
  s.variable = SweepVariable::power_split_t;
  s.grid = {0.0, 0.5, 1.0};
  s.scenario = desk_scenario(30.0, 0.5);
  s.realizations = 20;
  s.seed = kSeed;
  s.schemes = {{CommonScheme::bisection, PrivateScheme::mr},
               {CommonScheme::superposition, PrivateScheme::local_mmse},
               {CommonScheme::random, PrivateScheme::centralized_mmse}};
  auto csv = [&] {
    std::ostringstream os;
    write_csv(os, run_sweep(s));
    return os.str();
  };
  const std::string a = csv(), b = csv();
  return {a == b && !a.empty(), fmt("two single-threaded runs, %.0f bytes each, identical", a.size())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"closed-form term validation", closed_form_terms},
      {"closed form is a lower bound", lower_bound},
      {"aging trend", aging_trend},
      {"saturation trend", saturation},
      {"common-precoder dominance", dominance},
      {"private-precoder ordering", private_ordering},
      {"bisection mechanics", bisection_mechanics},
      {"channel statistics", channel_statistics},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Clock clock;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), clock.seconds());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
