#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "channel.hpp"

namespace rscf {

// Binary channel dump, all fields little-endian:
//
//   char[8]  magic "RSCFCH01"
//   u32      K, L, N, tau
//   h0       K*L*N complex
//   for n = 1..tau:
//     h      K*L*N complex          (true aged channels)
//     h_hat  K*L*N complex          (outdated CSI)
//     C      K*L*N*N complex        (row-major N x N per link)
//
// Loops run k outermost, then l, then the antenna index. A complex value is
// two IEEE-754 doubles, real part first.

inline constexpr std::array<char, 8> channel_dump_magic{'R', 'S', 'C', 'F', 'C', 'H', '0', '1'};

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw std::runtime_error("channel dump: truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

inline void put_complex(std::ostream& os, cplx z) {
  put_le(os, z.real());
  put_le(os, z.imag());
}

inline cplx get_complex(std::istream& is) {
  const double re = get_le<double>(is);
  const double im = get_le<double>(is);
  return {re, im};
}

}  // namespace detail

inline void write_channel_dump(std::ostream& os, const ChannelState& st) {
  const auto K = static_cast<std::uint32_t>(st.h0.rows());
  const auto L = static_cast<std::uint32_t>(st.h0.cols());
  const auto N = static_cast<std::uint32_t>(K && L ? st.h0(0, 0).size() : 0);
  const auto tau = static_cast<std::uint32_t>(st.h.size());
  os.write(channel_dump_magic.data(), channel_dump_magic.size());
  for (auto v : {K, L, N, tau}) detail::put_le(os, v);
  auto put_grid = [&](const ChannelGrid& g) {
    for (std::uint32_t k = 0; k < K; ++k)
      for (std::uint32_t l = 0; l < L; ++l)
        for (std::uint32_t a = 0; a < N; ++a) detail::put_complex(os, g(k, l)(a));
  };
  put_grid(st.h0);
  for (std::uint32_t n = 0; n < tau; ++n) {
    put_grid(st.h[n]);
    put_grid(st.h_hat[n]);
    for (std::uint32_t k = 0; k < K; ++k)
      for (std::uint32_t l = 0; l < L; ++l)
        for (std::uint32_t r = 0; r < N; ++r)
          for (std::uint32_t c = 0; c < N; ++c) detail::put_complex(os, st.C[n](k, l)(r, c));
  }
}

inline ChannelState read_channel_dump(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != channel_dump_magic)
    throw std::runtime_error("channel dump: bad magic");
  const auto K = detail::get_le<std::uint32_t>(is);
  const auto L = detail::get_le<std::uint32_t>(is);
  const auto N = detail::get_le<std::uint32_t>(is);
  const auto tau = detail::get_le<std::uint32_t>(is);
  auto get_grid = [&] {
    ChannelGrid g(K, L);
    for (std::uint32_t k = 0; k < K; ++k)
      for (std::uint32_t l = 0; l < L; ++l) {
        CVec v(N);
        for (std::uint32_t a = 0; a < N; ++a) v(a) = detail::get_complex(is);
        g(k, l) = std::move(v);
      }
    return g;
  };
  ChannelState st;
  st.h0 = get_grid();
  for (std::uint32_t n = 0; n < tau; ++n) {
    st.h.push_back(get_grid());
    st.h_hat.push_back(get_grid());
    Grid2<CMat> c(K, L);
    for (std::uint32_t k = 0; k < K; ++k)
      for (std::uint32_t l = 0; l < L; ++l) {
        CMat m(N, N);
        for (std::uint32_t r = 0; r < N; ++r)
          for (std::uint32_t col = 0; col < N; ++col) m(r, col) = detail::get_complex(is);
        c(k, l) = std::move(m);
      }
    st.C.push_back(std::move(c));
  }
  return st;
}

inline void write_channel_dump(const std::string& path, const ChannelState& st) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_channel_dump(os, st);
}

}  // namespace rscf
