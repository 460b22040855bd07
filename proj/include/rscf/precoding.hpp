#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "channel.hpp"
#include "core.hpp"

namespace rscf {

enum class PrivateScheme { mr, local_mmse, centralized_mmse };
enum class CommonScheme { random, superposition, bisection };

inline std::string to_string(PrivateScheme s) {
  switch (s) {
    case PrivateScheme::mr: return "mr";
    case PrivateScheme::local_mmse: return "lmmse";
    case PrivateScheme::centralized_mmse: return "cmmse";
  }
  return "?";
}

inline std::string to_string(CommonScheme s) {
  switch (s) {
    case CommonScheme::random: return "random";
    case CommonScheme::superposition: return "superposition";
    case CommonScheme::bisection: return "bisection";
  }
  return "?";
}

inline PrivateScheme parse_private_scheme(const std::string& s) {
  if (s == "mr") return PrivateScheme::mr;
  if (s == "lmmse") return PrivateScheme::local_mmse;
  if (s == "cmmse") return PrivateScheme::centralized_mmse;
  throw ConfigError("unknown private scheme '" + s + "' (expected mr, lmmse or cmmse)");
}

inline CommonScheme parse_common_scheme(const std::string& s) {
  if (s == "random") return CommonScheme::random;
  if (s == "superposition") return CommonScheme::superposition;
  if (s == "bisection") return CommonScheme::bisection;
  throw ConfigError("unknown common scheme '" + s + "' (expected random, superposition or bisection)");
}

/// Downlink power budget shared by all APs.
struct PowerParams {
  double p_d = 0.0;     // W per AP
  double t = 0.0;       // common-message share
  double sigma2 = 0.0;  // W
  int num_ues = 1;

  double common_power() const { return p_d * t; }
  double private_power() const { return p_d * (1.0 - t) / num_ues; }
};

/// Squared norm of every AP block of a stacked vector.
inline std::vector<double> block_norms_sq(const CVec& v, int num_aps, int antennas) {
  std::vector<double> out(num_aps);
  for (int l = 0; l < num_aps; ++l) out[l] = v.segment(static_cast<Eigen::Index>(l) * antennas, antennas).squaredNorm();
  return out;
}

inline double max_block_norm_sq(const CVec& v, int num_aps, int antennas) {
  double m = 0.0;
  for (double x : block_norms_sq(v, num_aps, antennas)) m = std::max(m, x);
  return m;
}

// ---------------------------------------------------------------------------
// Per-AP building blocks

struct MrPrecoder {
  CVec v;
  double mu = 0.0;
  bool defined = false;  // false when rho = 0 or tr(R) = 0
};

/// MR private precoder for one link with the analytic normalization
/// mu = 1 / (rho^2 tr(R)).
inline MrPrecoder mr_private(const CVec& h_hat, double rho, const CMat& R) {
  const double denom = rho * rho * R.trace().real();
  if (!(denom > 0.0)) return {CVec::Zero(h_hat.size()), 0.0, false};
  const double mu = 1.0 / denom;
  return {std::sqrt(mu) * h_hat, mu, true};
}

/// Unnormalized local MMSE private precoders of all UEs at one AP.
///
/// `h_hat` and `c` hold the estimate and error covariance of every UE at that AP.
inline std::vector<CVec> local_mmse_private(std::span<const CVec> h_hat, std::span<const CMat> c,
                                            const PowerParams& pw) {
  const std::size_t K = h_hat.size();
  const Eigen::Index N = K ? h_hat[0].size() : 0;
  const double scale = pw.private_power();
  std::vector<CVec> out(K, CVec::Zero(N));
  if (scale == 0.0) return out;
  CMat a = pw.sigma2 * CMat::Identity(N, N);
  for (std::size_t i = 0; i < K; ++i) a += scale * (h_hat[i] * h_hat[i].adjoint() + c[i]);
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("ill-conditioned MMSE system");
  for (std::size_t k = 0; k < K; ++k) out[k] = scale * llt.solve(h_hat[k]);
  return out;
}

/// Unnormalized centralized MMSE private precoders (stacked LN-vectors).
inline std::vector<CVec> centralized_mmse_private(const NetworkCsi& csi, const PowerParams& pw) {
  const int K = csi.num_ues();
  const Eigen::Index D = csi.dim();
  const double scale = pw.private_power();
  std::vector<CVec> out(K, CVec::Zero(D));
  if (scale == 0.0) return out;
  CMat a = pw.sigma2 * CMat::Identity(D, D);
  for (int i = 0; i < K; ++i) {
    a.selfadjointView<Eigen::Lower>().rankUpdate(csi.h_hat(i), scale);
    for (int l = 0; l < csi.num_aps(); ++l) {
      const Eigen::Index o = static_cast<Eigen::Index>(l) * csi.antennas();
      a.block(o, o, csi.antennas(), csi.antennas()) += scale * csi.c_block(i, l);
    }
  }
  Eigen::LLT<CMat, Eigen::Lower> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("ill-conditioned MMSE system");
  for (int k = 0; k < K; ++k) out[k] = scale * llt.solve(csi.h_hat(k));
  return out;
}

/// Unit vector on the first antenna of every AP.
inline CVec random_common(int antennas) {
  require(antennas >= 1, "random_common: need at least one antenna");
  CVec e = CVec::Zero(antennas);
  e(0) = 1.0;
  return e;
}

/// Unnormalized private precoders of every UE as stacked LN-vectors.
inline std::vector<CVec> private_directions(PrivateScheme scheme, const NetworkCsi& csi, const PowerParams& pw) {
  const int K = csi.num_ues(), L = csi.num_aps(), N = csi.antennas();
  switch (scheme) {
    case PrivateScheme::mr: {
      std::vector<CVec> out;
      for (int k = 0; k < K; ++k) out.push_back(csi.h_hat(k));
      return out;
    }
    case PrivateScheme::local_mmse: {
      std::vector<CVec> out(K, CVec(csi.dim()));
      std::vector<CVec> h(K);
      std::vector<CMat> c(K);
      for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
          h[k] = csi.h_hat_block(k, l);
          c[k] = csi.c_block(k, l);
        }
        auto v = local_mmse_private(h, c, pw);
        for (int k = 0; k < K; ++k) out[k].segment(static_cast<Eigen::Index>(l) * N, N) = v[k];
      }
      return out;
    }
    case PrivateScheme::centralized_mmse:
      return centralized_mmse_private(csi, pw);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Normalization

/// Scalars applied per block: v_{kl}^norm = sqrt(mu_kl) v_kl and
/// v_{c,l}^norm = sqrt(eta_l) sum_i v_il. Zero marks an undefined (all-zero) precoder.
struct Normalization {
  Grid2<double> mu;
  std::vector<double> eta;
};

inline double inverse_or_zero(double expected_norm_sq) { return expected_norm_sq > 0.0 ? 1.0 / expected_norm_sq : 0.0; }

/// Closed-form MR normalization: mu_kl = 1/(rho_k^2 tr R_kl), eta_l = 1/sum_i rho_i^2 tr R_il.
inline Normalization mr_normalization(const LinkStatistics& stats, std::span<const double> rho) {
  const std::size_t K = stats.num_ues(), L = stats.num_aps();
  Normalization n{Grid2<double>(K, L, 0.0), std::vector<double>(L, 0.0)};
  for (std::size_t l = 0; l < L; ++l) {
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double e = rho[k] * rho[k] * stats.R(k, l).trace().real();
      n.mu(k, l) = inverse_or_zero(e);
      sum += e;
    }
    n.eta[l] = inverse_or_zero(sum);
  }
  return n;
}

/// Sample-average expected norms over `samples` independent CSI draws from the
/// same statistics. For centralized MMSE the private coefficient is the
/// proportional one, 1 / max_l E||v_kl||^2, shared by all APs of a UE.
inline Normalization empirical_normalization(PrivateScheme scheme, const ChannelSampler& sampler,
                                             std::span<const double> rho, const PowerParams& pw, int samples,
                                             RandomStream rng) {
  require(samples >= 1, "calibration needs at least one sample");
  const auto& stats = sampler.stats();
  const int K = static_cast<int>(stats.num_ues()), L = static_cast<int>(stats.num_aps()), N = stats.antennas();
  Grid2<double> priv(K, L, 0.0);
  std::vector<double> common(L, 0.0);
  for (int s = 0; s < samples; ++s) {
    RandomStream draw = rng.substream({static_cast<std::uint64_t>(s)});
    const ChannelGrid h0 = draw_initial(sampler, draw);
    const NetworkCsi csi = outdated_network_csi(h0, rho, stats);
    const auto v = private_directions(scheme, csi, pw);
    for (int l = 0; l < L; ++l) {
      CVec sum = CVec::Zero(N);
      for (int k = 0; k < K; ++k) {
        auto blk = v[k].segment(static_cast<Eigen::Index>(l) * N, N);
        priv(k, l) += blk.squaredNorm();
        sum += blk;
      }
      common[l] += sum.squaredNorm();
    }
  }
  Normalization n{Grid2<double>(K, L, 0.0), std::vector<double>(L, 0.0)};
  for (int l = 0; l < L; ++l) n.eta[l] = inverse_or_zero(common[l] / samples);
  for (int k = 0; k < K; ++k) {
    if (scheme == PrivateScheme::centralized_mmse) {
      double worst = 0.0;
      for (int l = 0; l < L; ++l) worst = std::max(worst, priv(k, l) / samples);
      for (int l = 0; l < L; ++l) n.mu(k, l) = inverse_or_zero(worst);
    } else {
      for (int l = 0; l < L; ++l) n.mu(k, l) = inverse_or_zero(priv(k, l) / samples);
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Assembled precoders for one time instant

struct PrecoderSet {
  CVec v_common;
  std::vector<CVec> v_private;
  std::vector<double> eta;
  Grid2<double> mu;
  PrivateScheme private_scheme = PrivateScheme::mr;
  CommonScheme common_scheme = CommonScheme::superposition;
  /// Set when the superposition sum vanished at some AP (no usable common beam there).
  bool common_degenerate = false;
};

/// Superposition common precoder sqrt(eta_l) sum_i v_il from unnormalized private vectors.
inline CVec superposition_common(const std::vector<CVec>& unnormalized_private, std::span<const double> eta,
                                 int num_aps, int antennas, bool* degenerate = nullptr) {
  CVec vc = CVec::Zero(static_cast<Eigen::Index>(num_aps) * antennas);
  for (const auto& v : unnormalized_private) vc += v;
  bool zero = false;
  for (int l = 0; l < num_aps; ++l) {
    auto blk = vc.segment(static_cast<Eigen::Index>(l) * antennas, antennas);
    if (eta[l] == 0.0 || blk.squaredNorm() == 0.0) {
      blk.setZero();
      zero = true;
    } else {
      blk *= std::sqrt(eta[l]);
    }
  }
  if (degenerate) *degenerate = zero;
  return vc;
}

/// Normalized private precoders plus a random or superposition common precoder.
/// Bisection common precoders are produced by the maxmin module from this set.
inline PrecoderSet build_precoders(const NetworkCsi& csi, PrivateScheme priv, CommonScheme common,
                                   const Normalization& norm, const PowerParams& pw) {
  const int K = csi.num_ues(), L = csi.num_aps(), N = csi.antennas();
  PrecoderSet p;
  p.private_scheme = priv;
  p.common_scheme = common;
  p.mu = norm.mu;
  const auto raw = private_directions(priv, csi, pw);
  p.v_private.resize(K);
  for (int k = 0; k < K; ++k) {
    p.v_private[k] = raw[k];
    for (int l = 0; l < L; ++l) p.v_private[k].segment(static_cast<Eigen::Index>(l) * N, N) *= std::sqrt(norm.mu(k, l));
  }
  if (common == CommonScheme::random) {
    p.v_common = CVec(csi.dim());
    for (int l = 0; l < L; ++l) p.v_common.segment(static_cast<Eigen::Index>(l) * N, N) = random_common(N);
    p.eta.assign(L, 1.0);
  } else {
    p.eta = norm.eta;
    p.v_common = superposition_common(raw, norm.eta, L, N, &p.common_degenerate);
  }
  return p;
}

}  // namespace rscf
