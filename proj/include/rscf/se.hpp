#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "channel.hpp"
#include "maxmin.hpp"
#include "parallel.hpp"
#include "precoding.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "sinr.hpp"
#include "stats.hpp"

namespace rscf {

struct SchemePair {
  CommonScheme common = CommonScheme::superposition;
  PrivateScheme priv = PrivateScheme::mr;

  std::string label() const { return to_string(common) + "+" + to_string(priv); }
};

/// Parse "common+private", e.g. "bisection+cmmse".
inline SchemePair parse_scheme_pair(const std::string& s) {
  const auto plus = s.find('+');
  if (plus == std::string::npos) throw ConfigError("scheme pair '" + s + "' must look like common+private");
  return {parse_common_scheme(s.substr(0, plus)), parse_private_scheme(s.substr(plus + 1))};
}

enum class MrNormalization { analytic, empirical };

struct EvaluationOptions {
  /// CSI draws used to estimate expected precoder norms of MMSE schemes.
  int calibration_samples = 200;
  MrNormalization mr_normalization = MrNormalization::analytic;
  BisectionOptions bisection;
};

/// Per-realization outcome at one time instant.
struct RealizationOutcome {
  RealizationSe se;
  double min_common_sinr = 0.0;
  int bisection_iterations = 0;
};

/// Evaluates realizations at a fixed time instant for one scheme pair. The
/// precoder normalization depends only on statistics and is computed once.
class InstantEvaluator {
 public:
  InstantEvaluator(const ChannelSampler& sampler, std::vector<double> rho, const PowerParams& pw, SchemePair schemes,
                   const EvaluationOptions& opt, const RandomStream& calibration)
      : sampler_(&sampler), rho_(std::move(rho)), pw_(pw), schemes_(schemes), opt_(opt) {
    if (schemes.priv == PrivateScheme::mr && opt.mr_normalization == MrNormalization::analytic)
      norm_ = mr_normalization(sampler.stats(), rho_);
    else
      norm_ = empirical_normalization(schemes.priv, sampler, rho_, pw, opt.calibration_samples, calibration);
  }

  const Normalization& normalization() const { return norm_; }
  const std::vector<double>& rho() const { return rho_; }

  PrecoderSet precoders(const NetworkCsi& csi, BisectionResult* bisection = nullptr) const {
    const CommonScheme base_common =
        schemes_.common == CommonScheme::random ? CommonScheme::random : CommonScheme::superposition;
    PrecoderSet p = build_precoders(csi, schemes_.priv, base_common, norm_, pw_);
    if (schemes_.common == CommonScheme::bisection) {
      auto r = bisection_common(csi, p, pw_, opt_.bisection);
      if (bisection) *bisection = r;
      p = with_bisection_common(p, r);
    }
    return p;
  }

  RealizationOutcome evaluate(const ChannelGrid& h0) const {
    const NetworkCsi csi = outdated_network_csi(h0, rho_, sampler_->stats());
    BisectionResult bis;
    const PrecoderSet p = precoders(csi, &bis);
    const auto b = sinr_breakdown(csi, p, pw_);
    RealizationOutcome out;
    out.se = realization_se(b);
    out.min_common_sinr = b.min_common();
    out.bisection_iterations = bis.iterations;
    return out;
  }

 private:
  const ChannelSampler* sampler_;
  std::vector<double> rho_;
  PowerParams pw_;
  SchemePair schemes_;
  EvaluationOptions opt_;
  Normalization norm_;
};

/// Draws the initial channels of realization r of a layout (common random numbers:
/// independent of time instant, power, and schemes).
inline ChannelGrid realization_channels(const ChannelSampler& sampler, std::uint64_t seed, std::uint64_t layout_index,
                                        std::uint64_t r) {
  RandomStream rng = RandomStream(seed).substream(StreamTag::realization, {layout_index, r});
  return draw_initial(sampler, rng);
}

inline RandomStream calibration_stream(std::uint64_t seed, std::uint64_t layout_index) {
  return RandomStream(seed).substream(StreamTag::calibration, {layout_index});
}

struct SeEstimate {
  Estimate sum;
  Estimate common;
  Estimate priv;
  std::vector<RealizationOutcome> outcomes;
};

/// Monte-Carlo achievable sum SE: E{log2(1 + min_k SINR_c)} + sum_k E{log2(1 + SINR_p)},
/// the minimum taken per realization.
inline SeEstimate sum_se_monte_carlo(const ChannelSampler& sampler, std::span<const double> rho, const PowerParams& pw,
                                     SchemePair schemes, int num_realizations, std::uint64_t seed,
                                     std::uint64_t layout_index = 0, const EvaluationOptions& opt = {},
                                     int threads = 1) {
  require(num_realizations >= 1, "sum_se_monte_carlo: need at least one realization");
  InstantEvaluator eval(sampler, std::vector<double>(rho.begin(), rho.end()), pw, schemes, opt,
                        calibration_stream(seed, layout_index));
  SeEstimate est;
  est.outcomes.resize(num_realizations);
  parallel_for(num_realizations, threads, [&](std::size_t r) {
    est.outcomes[r] = eval.evaluate(realization_channels(sampler, seed, layout_index, r));
  });
  RunningStats s, c, p;
  for (const auto& o : est.outcomes) {
    s.add(o.se.total());
    c.add(o.se.common);
    p.add(o.se.priv);
  }
  est.sum = to_estimate(s);
  est.common = to_estimate(c);
  est.priv = to_estimate(p);
  return est;
}

// ---------------------------------------------------------------------------
// Closed-form (use-and-then-forget) sum SE for MR private + superposition common

struct ClosedFormTerms {
  std::vector<double> ds_common, int_common, ds_private, int_private;
  std::vector<double> sinr_common, sinr_private;
  Grid2<double> mu;
  std::vector<double> eta;
};

struct ClosedFormResult {
  double sum_se = 0.0;
  double common_se = 0.0;
  double private_se = 0.0;
  ClosedFormTerms terms;
};

inline ClosedFormResult closed_form_sum_se(const LinkStatistics& stats, std::span<const double> rho,
                                           const PowerParams& pw, SchemePair schemes = {}) {
  if (schemes.priv != PrivateScheme::mr || schemes.common != CommonScheme::superposition)
    throw UnsupportedScheme("closed-form sum SE exists only for superposition common + MR private precoding, got " +
                            schemes.label());
  const std::size_t K = stats.num_ues(), L = stats.num_aps();
  const Normalization norm = mr_normalization(stats, rho);
  const double pc = pw.common_power(), pp = pw.private_power();

  ClosedFormResult out;
  auto& t = out.terms;
  t.mu = norm.mu;
  t.eta = norm.eta;
  t.ds_common.assign(K, 0.0);
  t.int_common.assign(K, 0.0);
  t.ds_private.assign(K, 0.0);
  t.int_private.assign(K, 0.0);
  t.sinr_common.assign(K, 0.0);
  t.sinr_private.assign(K, 0.0);

  for (std::size_t k = 0; k < K; ++k) {
    const double rk2 = rho[k] * rho[k];
    double coh_c = 0.0, coh_p = 0.0, ic = 0.0, ip = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double tr = stats.R(k, l).trace().real();
      coh_c += std::sqrt(norm.eta[l]) * tr;
      coh_p += std::sqrt(norm.mu(k, l)) * tr;
      for (std::size_t i = 0; i < K; ++i) {
        const double cross = rho[i] * rho[i] * trace_product(stats.R(i, l), stats.R(k, l));
        ic += norm.eta[l] * cross;
        ip += norm.mu(i, l) * cross;
      }
    }
    t.ds_common[k] = pc * rk2 * rk2 * coh_c * coh_c;
    t.int_common[k] = pc * ic;
    t.ds_private[k] = pp * rk2 * rk2 * coh_p * coh_p;
    t.int_private[k] = pp * ip;
  }
  double min_c = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    t.sinr_common[k] = detail::safe_ratio(t.ds_common[k], t.int_common[k] + t.int_private[k] + t.ds_private[k] + pw.sigma2);
    t.sinr_private[k] = detail::safe_ratio(t.ds_private[k], t.int_private[k] + pw.sigma2);
    min_c = std::min(min_c, t.sinr_common[k]);
    out.private_se += std::log2(1.0 + t.sinr_private[k]);
  }
  out.common_se = K ? std::log2(1.0 + min_c) : 0.0;
  out.sum_se = out.common_se + out.private_se;
  return out;
}

/// Closed-form expectation identities behind the bound:
/// E{|sum_i h_kl^H hhat_il|^2} and E{h_kl^H hhat_kl}.
inline double upsilon1_closed_form(const LinkStatistics& stats, std::span<const double> rho, std::size_t k,
                                   std::size_t l) {
  double s = 0.0;
  for (std::size_t i = 0; i < stats.num_ues(); ++i) s += rho[i] * rho[i] * trace_product(stats.R(i, l), stats.R(k, l));
  const double tr = stats.R(k, l).trace().real();
  return s + std::pow(rho[k], 4) * tr * tr;
}

inline double upsilon2_closed_form(const LinkStatistics& stats, std::span<const double> rho, std::size_t k,
                                   std::size_t l) {
  return rho[k] * rho[k] * stats.R(k, l).trace().real();
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracles for the raw expectations of the bound

enum class UatfTerm { upsilon1, upsilon2, ds_common, int_common, ds_private, int_private };

inline std::string to_string(UatfTerm t) {
  switch (t) {
    case UatfTerm::upsilon1: return "upsilon1";
    case UatfTerm::upsilon2: return "upsilon2";
    case UatfTerm::ds_common: return "DS_c";
    case UatfTerm::int_common: return "INT_c";
    case UatfTerm::ds_private: return "DS_p";
    case UatfTerm::int_private: return "INT_p";
  }
  return "?";
}

/// Monte-Carlo estimates of all DS/INT terms per UE and of the two
/// expectation identities per (UE, AP).
struct UatfOracle {
  std::vector<Estimate> ds_common, int_common, ds_private, int_private;
  Grid2<Estimate> upsilon1, upsilon2;
  int samples = 0;
};

namespace detail {

/// Sample moments of a complex scalar needed for |E X|^2 and Var X.
struct ComplexMoments {
  std::vector<cplx> x;

  cplx mean() const {
    cplx m = 0.0;
    for (const auto& v : x) m += v;
    return m / static_cast<double>(x.size());
  }

  /// |E X|^2 with a delta-method standard error.
  Estimate mean_abs_sq() const {
    const cplx m = mean();
    const double n = static_cast<double>(x.size());
    double vrr = 0.0, vii = 0.0, vri = 0.0;
    for (const auto& v : x) {
      const cplx d = v - m;
      vrr += d.real() * d.real();
      vii += d.imag() * d.imag();
      vri += d.real() * d.imag();
    }
    vrr /= (n - 1.0);
    vii /= (n - 1.0);
    vri /= (n - 1.0);
    const double a = m.real(), b = m.imag();
    const double var = 4.0 * (a * a * vrr + b * b * vii + 2.0 * a * b * vri) / n;
    return {std::norm(m), std::sqrt(std::max(var, 0.0))};
  }
};

}  // namespace detail

/// Draws true aged channels h_n = rho h_0 + sqrt(1 - rho^2) g and outdated
/// estimates rho h_0, and averages the raw expectations of the bound.
inline UatfOracle uatf_oracle(const ChannelSampler& sampler, std::span<const double> rho, const PowerParams& pw,
                              int num_samples, RandomStream rng) {
  require(num_samples >= 2, "uatf_oracle: need at least two samples");
  const auto& stats = sampler.stats();
  const int K = static_cast<int>(stats.num_ues()), L = static_cast<int>(stats.num_aps()), N = stats.antennas();
  const Normalization norm = mr_normalization(stats, rho);
  const double pc = pw.common_power(), pp = pw.private_power();

  std::vector<detail::ComplexMoments> xc(K);
  std::vector<detail::ComplexMoments> xp_own(K);
  std::vector<std::vector<double>> xp_other(K);  // sum_{i != k} |X_ki|^2 per sample
  Grid2<detail::ComplexMoments> u2(K, L);
  Grid2<RunningStats> u1(K, L);
  for (int k = 0; k < K; ++k) {
    xc[k].x.reserve(num_samples);
    xp_own[k].x.reserve(num_samples);
    xp_other[k].reserve(num_samples);
  }

  for (int s = 0; s < num_samples; ++s) {
    RandomStream draw = rng.substream({static_cast<std::uint64_t>(s)});
    ChannelGrid h(K, L), hh(K, L);
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L; ++l) {
        const CVec h0 = sampler.draw(k, l, draw);
        h(k, l) = age_channel(h0, rho[k], sampler.r_half(k, l), draw);
        hh(k, l) = rho[k] * h0;
      }
    std::vector<CVec> sum_hat(L, CVec::Zero(N));
    for (int l = 0; l < L; ++l)
      for (int i = 0; i < K; ++i) sum_hat[l] += hh(i, l);
    for (int k = 0; k < K; ++k) {
      cplx c = 0.0;
      std::vector<cplx> p(K, 0.0);
      for (int l = 0; l < L; ++l) {
        const cplx proj = h(k, l).dot(sum_hat[l]);
        c += std::sqrt(norm.eta[l]) * proj;
        u1(k, l).add(std::norm(proj));
        u2(k, l).x.push_back(h(k, l).dot(hh(k, l)));
        for (int i = 0; i < K; ++i) p[i] += std::sqrt(norm.mu(i, l)) * h(k, l).dot(hh(i, l));
      }
      xc[k].x.push_back(c);
      xp_own[k].x.push_back(p[k]);
      double other = 0.0;
      for (int i = 0; i < K; ++i)
        if (i != k) other += std::norm(p[i]);
      xp_other[k].push_back(other);
    }
  }

  UatfOracle o;
  o.samples = num_samples;
  o.upsilon1 = Grid2<Estimate>(K, L);
  o.upsilon2 = Grid2<Estimate>(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      o.upsilon1(k, l) = to_estimate(u1(k, l));
      RunningStats re;
      for (const auto& v : u2(k, l).x) re.add(v.real());
      o.upsilon2(k, l) = to_estimate(re);
    }
    const auto dsc = xc[k].mean_abs_sq();
    o.ds_common.push_back({pc * dsc.value, pc * dsc.std_error});
    const cplx mc = xc[k].mean();
    RunningStats vc;
    for (const auto& v : xc[k].x) vc.add(std::norm(v - mc));
    o.int_common.push_back({pc * vc.mean(), pc * vc.std_error()});

    const auto dsp = xp_own[k].mean_abs_sq();
    o.ds_private.push_back({pp * dsp.value, pp * dsp.std_error});
    const cplx mp = xp_own[k].mean();
    RunningStats vp;
    for (int s = 0; s < num_samples; ++s) vp.add(xp_other[k][s] + std::norm(xp_own[k].x[s] - mp));
    o.int_private.push_back({pp * vp.mean(), pp * vp.std_error()});
  }
  return o;
}

/// Single-term view of the oracle: UE k (and AP l for the identities).
inline Estimate uatf_term_oracle(UatfTerm term, const ChannelSampler& sampler, std::span<const double> rho,
                                 const PowerParams& pw, int num_samples, RandomStream rng, int k = 0, int l = 0) {
  const auto o = uatf_oracle(sampler, rho, pw, num_samples, std::move(rng));
  switch (term) {
    case UatfTerm::upsilon1: return o.upsilon1(k, l);
    case UatfTerm::upsilon2: return o.upsilon2(k, l);
    case UatfTerm::ds_common: return o.ds_common[k];
    case UatfTerm::int_common: return o.int_common[k];
    case UatfTerm::ds_private: return o.ds_private[k];
    case UatfTerm::int_private: return o.int_private[k];
  }
  return {};
}

}  // namespace rscf
