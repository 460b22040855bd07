#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "core.hpp"

namespace rscf {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Stream tags keep the substreams of different consumers apart.
enum class StreamTag : std::uint64_t {
  layout = 1,
  realization = 2,
  calibration = 3,
  innovation = 4,
  oracle = 5,
};

/// Seeded random stream. Substreams are derived from (seed, indices) so a
/// realization's draws never depend on how many draws other realizations made.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(detail::splitmix64(seed)) {}

  RandomStream substream(std::initializer_list<std::uint64_t> path) const {
    std::uint64_t h = detail::splitmix64(seed_ ^ 0xA5A5A5A5A5A5A5A5ULL);
    for (auto p : path) h = detail::splitmix64(h ^ detail::splitmix64(p + 0x632BE59BD9B4E019ULL));
    return RandomStream(h);
  }

  RandomStream substream(StreamTag tag, std::initializer_list<std::uint64_t> path) const {
    std::uint64_t h = detail::splitmix64(seed_ ^ static_cast<std::uint64_t>(tag));
    for (auto p : path) h = detail::splitmix64(h ^ detail::splitmix64(p + 0x632BE59BD9B4E019ULL));
    return RandomStream(h);
  }

  std::uint64_t seed() const { return seed_; }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }

  /// Standard circularly-symmetric complex Gaussian, CN(0, 1).
  cplx complex_normal() {
    const double s = std::sqrt(0.5);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

  CVec complex_normal_vector(Eigen::Index n) {
    CVec z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = complex_normal();
    return z;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rscf
