#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bessel.hpp"
#include "core.hpp"
#include "random.hpp"
#include "scenario.hpp"

namespace rscf {

inline double doppler_shift(double speed_mps, double carrier_hz) { return speed_mps * carrier_hz / speed_of_light; }

/// Jakes temporal correlation between instant 0 and instant n.
inline double temporal_correlation(double speed_mps, double carrier_hz, double sampling_time_s, int n) {
  require(speed_mps >= 0.0 && std::isfinite(speed_mps), "temporal_correlation: speed must be finite and >= 0");
  require(n >= 0, "temporal_correlation: time index must be >= 0");
  return bessel_j0(2.0 * pi * doppler_shift(speed_mps, carrier_hz) * sampling_time_s * n);
}

/// rho_{k,n}, rho_bar_{k,n} = sqrt(1 - rho^2) for n = 0..tau.
struct AgingCoefficients {
  Grid2<double> rho;
  Grid2<double> rho_bar;
  std::vector<double> doppler_hz;

  std::vector<double> at(int n) const {
    std::vector<double> out(rho.rows());
    for (std::size_t k = 0; k < rho.rows(); ++k) out[k] = rho(k, n);
    return out;
  }
};

inline AgingCoefficients aging_coefficients(const ScenarioConfig& cfg, const std::vector<double>& velocities) {
  const std::size_t K = velocities.size();
  const std::size_t T = static_cast<std::size_t>(cfg.frame_length) + 1;
  AgingCoefficients a{Grid2<double>(K, T), Grid2<double>(K, T), std::vector<double>(K)};
  for (std::size_t k = 0; k < K; ++k) {
    a.doppler_hz[k] = doppler_shift(velocities[k], cfg.carrier_freq_hz);
    for (std::size_t n = 0; n < T; ++n) {
      const double r = temporal_correlation(velocities[k], cfg.carrier_freq_hz, cfg.sampling_time_s, static_cast<int>(n));
      a.rho(k, n) = r;
      a.rho_bar(k, n) = std::sqrt(std::max(0.0, 1.0 - r * r));
    }
  }
  return a;
}

/// Hermitian PSD square root via eigendecomposition; eigenvalues within
/// -1e-12 * trace of zero are clamped, anything more negative is rejected.
inline CMat hermitian_sqrt(const CMat& a) {
  if (a.size() == 0) return a;
  const double scale = std::max(std::abs(a.trace().real()), 0.0);
  if (scale == 0.0 && a.cwiseAbs().maxCoeff() == 0.0) return CMat::Zero(a.rows(), a.cols());
  Eigen::SelfAdjointEigenSolver<CMat> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("hermitian_sqrt: eigendecomposition failed");
  Eigen::VectorXd ev = eig.eigenvalues();
  if (ev.minCoeff() < -1e-12 * scale) throw NumericalError("hermitian_sqrt: matrix is not positive semidefinite");
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().adjoint();
}

/// Link statistics with their square-root factors, for drawing CN(0, R_kl).
class ChannelSampler {
 public:
  explicit ChannelSampler(const LinkStatistics& stats) : stats_(&stats), r_half_(stats.R.rows(), stats.R.cols()) {
    for (std::size_t k = 0; k < stats.R.rows(); ++k)
      for (std::size_t l = 0; l < stats.R.cols(); ++l) r_half_(k, l) = hermitian_sqrt(stats.R(k, l));
  }

  const LinkStatistics& stats() const { return *stats_; }
  const CMat& r_half(std::size_t k, std::size_t l) const { return r_half_(k, l); }

  CVec draw(std::size_t k, std::size_t l, RandomStream& rng) const {
    return r_half_(k, l) * rng.complex_normal_vector(r_half_(k, l).cols());
  }

 private:
  const LinkStatistics* stats_;
  Grid2<CMat> r_half_;
};

using ChannelGrid = Grid2<CVec>;

/// h_{kl,0} ~ CN(0, R_kl) for every link.
inline ChannelGrid draw_initial(const ChannelSampler& sampler, RandomStream& rng) {
  const auto& s = sampler.stats();
  ChannelGrid h0(s.num_ues(), s.num_aps());
  for (std::size_t k = 0; k < s.num_ues(); ++k)
    for (std::size_t l = 0; l < s.num_aps(); ++l) h0(k, l) = sampler.draw(k, l, rng);
  return h0;
}

/// h_n = rho h_0 + sqrt(1 - rho^2) g, g ~ CN(0, R) drawn fresh.
inline CVec age_channel(const CVec& h0, double rho, const CMat& r_half, RandomStream& rng) {
  require(std::abs(rho) <= 1.0, "age_channel: |rho| must be <= 1");
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  CVec g = r_half * rng.complex_normal_vector(r_half.cols());
  return rho * h0 + rho_bar * g;
}

struct OutdatedCsi {
  CVec h_hat;
  CMat C;
};

/// Outdated estimate rho h_0 and the covariance (1 - rho^2) R of its error.
inline OutdatedCsi outdated_csi(const CVec& h0, double rho, const CMat& R) {
  return {rho * h0, (1.0 - rho * rho) * R};
}

/// Full per-realization channel history over instants 1..tau (index n-1).
struct ChannelState {
  ChannelGrid h0;
  std::vector<ChannelGrid> h;
  std::vector<ChannelGrid> h_hat;
  std::vector<Grid2<CMat>> C;

  int frame_length() const { return static_cast<int>(h.size()); }
};

inline ChannelState generate_channel_state(const ChannelSampler& sampler, const AgingCoefficients& aging,
                                           RandomStream& rng) {
  const auto& s = sampler.stats();
  const std::size_t K = s.num_ues(), L = s.num_aps();
  const int tau = static_cast<int>(aging.rho.cols()) - 1;
  ChannelState st;
  st.h0 = draw_initial(sampler, rng);
  for (int n = 1; n <= tau; ++n) {
    ChannelGrid h(K, L), hh(K, L);
    Grid2<CMat> c(K, L);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < L; ++l) {
        const double rho = aging.rho(k, n);
        h(k, l) = age_channel(st.h0(k, l), rho, sampler.r_half(k, l), rng);
        auto csi = outdated_csi(st.h0(k, l), rho, s.R(k, l));
        hh(k, l) = std::move(csi.h_hat);
        c(k, l) = std::move(csi.C);
      }
    st.h.push_back(std::move(h));
    st.h_hat.push_back(std::move(hh));
    st.C.push_back(std::move(c));
  }
  return st;
}

/// Network-wide CSI at one time instant: AP-major stacked estimates and the
/// diagonal blocks of the block-diagonal error covariances.
class NetworkCsi {
 public:
  NetworkCsi() = default;
  NetworkCsi(int num_aps, int antennas, std::vector<CVec> h_hat, Grid2<CMat> c_blocks)
      : L_(num_aps), N_(antennas), h_hat_(std::move(h_hat)), c_(std::move(c_blocks)) {}

  int num_ues() const { return static_cast<int>(h_hat_.size()); }
  int num_aps() const { return L_; }
  int antennas() const { return N_; }
  int dim() const { return L_ * N_; }

  const CVec& h_hat(int k) const { return h_hat_[k]; }
  auto h_hat_block(int k, int l) const { return h_hat_[k].segment(static_cast<Eigen::Index>(l) * N_, N_); }
  const CMat& c_block(int k, int l) const { return c_(k, l); }

  /// Dense LN x LN block-diagonal error covariance of UE k.
  CMat c_dense(int k) const {
    CMat c = CMat::Zero(dim(), dim());
    for (int l = 0; l < L_; ++l) c.block(l * N_, l * N_, N_, N_) = c_(k, l);
    return c;
  }

  /// v^H C_k v exploiting the block structure.
  double error_quadratic(int k, const CVec& v) const {
    double s = 0.0;
    for (int l = 0; l < L_; ++l) {
      auto vl = v.segment(static_cast<Eigen::Index>(l) * N_, N_);
      s += (vl.adjoint() * c_(k, l) * vl).value().real();
    }
    return s;
  }

  ChannelGrid unstack() const {
    ChannelGrid g(h_hat_.size(), L_);
    for (int k = 0; k < num_ues(); ++k)
      for (int l = 0; l < L_; ++l) g(k, l) = h_hat_block(k, l);
    return g;
  }

 private:
  int L_ = 0;
  int N_ = 0;
  std::vector<CVec> h_hat_;
  Grid2<CMat> c_;
};

inline NetworkCsi stack_csi(const ChannelGrid& h_hat, const Grid2<CMat>& c) {
  const int K = static_cast<int>(h_hat.rows()), L = static_cast<int>(h_hat.cols());
  const int N = L > 0 && K > 0 ? static_cast<int>(h_hat(0, 0).size()) : 0;
  std::vector<CVec> stacked(K, CVec(L * N));
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) stacked[k].segment(static_cast<Eigen::Index>(l) * N, N) = h_hat(k, l);
  return NetworkCsi(L, N, std::move(stacked), c);
}

/// CSI at instant n of a stored channel history.
inline NetworkCsi stack_csi(const ChannelState& st, int n) { return stack_csi(st.h_hat.at(n - 1), st.C.at(n - 1)); }

/// CSI implied by initial channels and per-UE correlation coefficients, without
/// materializing the true aged channels.
inline NetworkCsi outdated_network_csi(const ChannelGrid& h0, std::span<const double> rho, const LinkStatistics& stats) {
  const std::size_t K = h0.rows(), L = h0.cols();
  ChannelGrid hh(K, L);
  Grid2<CMat> c(K, L);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < L; ++l) {
      auto csi = outdated_csi(h0(k, l), rho[k], stats.R(k, l));
      hh(k, l) = std::move(csi.h_hat);
      c(k, l) = std::move(csi.C);
    }
  return stack_csi(hh, c);
}

}  // namespace rscf
