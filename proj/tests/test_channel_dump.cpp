#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include <rscf/channel_dump.hpp>

using namespace rscf;

namespace {

ChannelState sample_state() {
  ScenarioConfig cfg;
  cfg.num_aps = 3;
  cfg.num_ues = 2;
  cfg.antennas_per_ap = 2;
  cfg.frame_length = 4;
  cfg.velocity = VelocityProfile::equal(30.0);
  RandomStream rng(1);
  const Layout lay = drop_layout(cfg, rng);
  static LinkStatistics stats;
  stats = link_statistics(cfg, lay);
  const ChannelSampler sampler(stats);
  return generate_channel_state(sampler, aging_coefficients(cfg, lay.ue_velocities), rng);
}

}  // namespace

TEST(ChannelDump, RoundTripIsBitExact) {
  const ChannelState st = sample_state();
  std::stringstream ss;
  write_channel_dump(ss, st);
  const ChannelState back = read_channel_dump(ss);
  ASSERT_EQ(back.frame_length(), 4);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 3; ++l) {
      EXPECT_EQ(back.h0(k, l), st.h0(k, l));
      for (int n = 0; n < 4; ++n) {
        EXPECT_EQ(back.h[n](k, l), st.h[n](k, l));
        EXPECT_EQ(back.h_hat[n](k, l), st.h_hat[n](k, l));
        EXPECT_EQ(back.C[n](k, l), st.C[n](k, l));
      }
    }
}

TEST(ChannelDump, LayoutAndSize) {
  const ChannelState st = sample_state();
  std::stringstream ss;
  write_channel_dump(ss, st);
  const std::string bytes = ss.str();
  const std::size_t K = 2, L = 3, N = 2, tau = 4;
  EXPECT_EQ(bytes.size(), 8 + 16 + 16 * (K * L * N + tau * (2 * K * L * N + K * L * N * N)));
  EXPECT_EQ(bytes.substr(0, 8), "RSCFCH01");
  const unsigned char* u = reinterpret_cast<const unsigned char*>(bytes.data());
  EXPECT_EQ(u[8], 2);  // K, little-endian
  EXPECT_EQ(u[9], 0);
  EXPECT_EQ(u[12], 3);  // L
  EXPECT_EQ(u[20], 4);  // tau
  double re = 0.0, im = 0.0;
  std::memcpy(&re, bytes.data() + 24, 8);
  std::memcpy(&im, bytes.data() + 32, 8);
  EXPECT_EQ(re, st.h0(0, 0)(0).real());
  EXPECT_EQ(im, st.h0(0, 0)(0).imag());
}

TEST(ChannelDump, RejectsBadInput) {
  std::stringstream bad("NOTADUMP........");
  EXPECT_THROW(read_channel_dump(bad), std::runtime_error);
  std::stringstream ss;
  write_channel_dump(ss, sample_state());
  std::stringstream truncated(ss.str().substr(0, 100));
  EXPECT_THROW(read_channel_dump(truncated), std::runtime_error);
}
