#include <gtest/gtest.h>

#include <cmath>

#include <rscf/channel.hpp>
#include <rscf/precoding.hpp>
#include <rscf/sinr.hpp>

using namespace rscf;

namespace {

CVec scalar(cplx x) {
  CVec v(1);
  v(0) = x;
  return v;
}

/// One AP, one antenna, arbitrary K.
NetworkCsi scalar_csi(const std::vector<cplx>& h, const std::vector<double>& c) {
  const std::size_t K = h.size();
  ChannelGrid g(K, 1);
  Grid2<CMat> cg(K, 1);
  for (std::size_t k = 0; k < K; ++k) {
    g(k, 0) = scalar(h[k]);
    cg(k, 0) = CMat::Constant(1, 1, c[k]);
  }
  return stack_csi(g, cg);
}

struct Random {
  NetworkCsi csi;
  PrecoderSet p;
};

Random random_instance(std::uint64_t seed, double rho_value, double t) {
  Grid2<double> beta(3, 2);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 2; ++l) beta(k, l) = 0.5 + k + 0.3 * l;
  static LinkStatistics stats;
  stats = uniform_link_statistics(beta, 2, CorrelationModel::exponential(0.4));
  const ChannelSampler sampler(stats);
  RandomStream rng(seed);
  const std::vector<double> rho(3, rho_value);
  Random r;
  r.csi = outdated_network_csi(draw_initial(sampler, rng), rho, stats);
  r.p = build_precoders(r.csi, PrivateScheme::mr, CommonScheme::superposition, mr_normalization(stats, rho),
                        {1.0, t, 0.1, 3});
  return r;
}

}  // namespace

TEST(SinrCommon, ScalarHandEvaluation) {
  const auto csi = scalar_csi({1.0}, {0.0});
  const PowerParams pw{2.0, 0.5, 1.0, 1};
  const auto s = sinr_terms(0, csi, scalar(1.0), {scalar(1.0)}, pw);
  EXPECT_DOUBLE_EQ(s.sinr_common, 0.5);
  EXPECT_DOUBLE_EQ(s.common_numerator, 1.0);
  EXPECT_DOUBLE_EQ(s.private_leakage, 1.0);
}

TEST(SinrCommon, NoCommonPower) {
  const auto r = random_instance(1, 0.8, 0.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(sinr_common(k, r.csi, r.p, {1.0, 0.0, 0.1, 3}), 0.0);
    EXPECT_EQ(sinr_terms(k, r.csi, r.p.v_common, r.p.v_private, {1.0, 0.0, 0.1, 3}).common_numerator, 0.0);
  }
}

TEST(SinrCommon, OrthogonalCommonBeam) {
  ChannelGrid g(1, 1);
  CVec h(2);
  h << 1.0, 0.0;
  g(0, 0) = h;
  Grid2<CMat> c(1, 1);
  c(0, 0) = CMat::Zero(2, 2);
  const auto csi = stack_csi(g, c);
  CVec vc(2);
  vc << 0.0, 1.0;
  EXPECT_EQ(sinr_terms(0, csi, vc, {h}, {1.0, 0.5, 0.1, 1}).sinr_common, 0.0);
}

TEST(SinrPrivate, NoPrivatePower) {
  const auto r = random_instance(2, 0.8, 1.0);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(sinr_private(k, r.csi, r.p, {1.0, 1.0, 0.1, 3}), 0.0);
}

TEST(SinrPrivate, ScalarHandEvaluation) {
  const auto csi = scalar_csi({2.0}, {0.0});
  const PowerParams pw{1.0, 0.0, 1.0, 1};
  EXPECT_DOUBLE_EQ(sinr_terms(0, csi, scalar(0.0), {scalar(1.0)}, pw).sinr_private, 4.0);
}

TEST(SinrPrivate, OrthogonalInterfererAddsNothing) {
  ChannelGrid g(2, 1);
  Grid2<CMat> c(2, 1, CMat::Zero(2, 2));
  CVec h1(2), h2(2);
  h1 << 1.0, 0.0;
  h2 << 0.3, 1.0;
  g(0, 0) = h1;
  g(1, 0) = h2;
  const auto csi = stack_csi(g, c);
  CVec v2(2);
  v2 << 0.0, 1.0;
  const PowerParams pw{1.0, 0.5, 0.1, 2};
  const double alone = sinr_terms(0, csi, CVec::Zero(2), {h1, CVec::Zero(2)}, pw).sinr_private;
  EXPECT_DOUBLE_EQ(sinr_terms(0, csi, CVec::Zero(2), {h1, v2}, pw).sinr_private, alone);
}

TEST(SinrPrivate, ErrorLeakageIncludesOwnPrecoder) {
  const auto csi = scalar_csi({1.0, 0.5}, {0.2, 0.3});
  const PowerParams pw{2.0, 0.0, 1.0, 2};
  const std::vector<CVec> v{scalar(1.0), scalar(2.0)};
  const auto s = sinr_terms(0, csi, scalar(0.0), v, pw);
  // pp = 1; leakage from UE 2 = |1 * 2|^2 = 4; error leakage = 0.2 * (1 + 4) = 1.0
  EXPECT_DOUBLE_EQ(s.private_interference, 4.0);
  EXPECT_DOUBLE_EQ(s.private_error, 1.0);
  EXPECT_DOUBLE_EQ(s.sinr_private, 1.0 / (4.0 + 1.0 + 1.0));
}

TEST(SinrTerms, MatchDenseOracle) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto r = random_instance(seed, 0.7, 0.4);
    const PowerParams pw{1.0, 0.4, 0.1, 3};
    for (int k = 0; k < 3; ++k) {
      const auto s = sinr_terms(k, r.csi, r.p.v_common, r.p.v_private, pw);
      const CMat C = r.csi.c_dense(k);
      const CVec& h = r.csi.h_hat(k);
      const double pc = pw.p_d * pw.t, pp = pw.p_d * (1 - pw.t) / 3;
      double leak = 0, err = 0, other = 0;
      for (int i = 0; i < 3; ++i) {
        const cplx g = (h.adjoint() * r.p.v_private[i]).value();
        leak += std::norm(g);
        if (i != k) other += std::norm(g);
        err += (r.p.v_private[i].adjoint() * C * r.p.v_private[i]).value().real();
      }
      const double num_c = pc * std::norm((h.adjoint() * r.p.v_common).value());
      const double cerr = pc * (r.p.v_common.adjoint() * C * r.p.v_common).value().real();
      const double den_c = pp * leak + cerr + pp * err + pw.sigma2;
      const double num_p = pp * std::norm((h.adjoint() * r.p.v_private[k]).value());
      const double den_p = pp * other + pp * err + pw.sigma2;
      EXPECT_NEAR(s.sinr_common, num_c / den_c, 1e-12 * (num_c / den_c));
      EXPECT_NEAR(s.sinr_private, num_p / den_p, 1e-12 * (num_p / den_p));
      EXPECT_NEAR(s.common_denominator() - (s.private_leakage + s.common_error + s.private_error + s.noise), 0.0,
                  1e-15 * den_c);
      for (double x : {s.common_numerator, s.private_leakage, s.common_error, s.private_error, s.private_numerator,
                       s.private_interference, s.sinr_common, s.sinr_private}) {
        EXPECT_GE(x, 0.0);
        EXPECT_TRUE(std::isfinite(x));
      }
    }
  }
}

TEST(SinrTerms, PerfectCsiHasNoErrorLeakage) {
  const auto r = random_instance(6, 1.0, 0.5);
  for (int k = 0; k < 3; ++k) {
    const auto s = sinr_terms(k, r.csi, r.p.v_common, r.p.v_private, {1.0, 0.5, 0.1, 3});
    EXPECT_EQ(s.common_error, 0.0);
    EXPECT_EQ(s.private_error, 0.0);
  }
}

TEST(RealizationSe, UsesMinimumCommonSinr) {
  SinrBreakdown b;
  b.per_ue.resize(2);
  b.per_ue[0].sinr_common = 3.0;
  b.per_ue[1].sinr_common = 1.0;
  b.per_ue[0].sinr_private = 7.0;
  b.per_ue[1].sinr_private = 0.0;
  const auto se = realization_se(b);
  EXPECT_DOUBLE_EQ(b.min_common(), 1.0);
  EXPECT_DOUBLE_EQ(se.common, 1.0);
  EXPECT_DOUBLE_EQ(se.priv, 3.0);
  EXPECT_DOUBLE_EQ(se.total(), 4.0);
}
