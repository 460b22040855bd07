#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "channel.hpp"
#include "precoding.hpp"

namespace rscf {

/// Every term of the common and private SINRs of one UE. The common
/// denominator is private_leakage + common_error + private_error + noise; the
/// private denominator is private_interference + private_error + noise.
struct SinrTerms {
  double common_numerator = 0.0;
  double private_leakage = 0.0;  // (p(1-t)/K) sum_i |h_k^H v_i|^2, all i
  double common_error = 0.0;     // p t v_c^H C_k v_c
  double private_error = 0.0;    // (p(1-t)/K) sum_i v_i^H C_k v_i, all i
  double noise = 0.0;
  double sinr_common = 0.0;

  double private_numerator = 0.0;
  double private_interference = 0.0;  // private_leakage without the i = k term
  double sinr_private = 0.0;

  double common_denominator() const { return private_leakage + common_error + private_error + noise; }
  double private_denominator() const { return private_interference + private_error + noise; }
};

namespace detail {
inline double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
}  // namespace detail

inline SinrTerms sinr_terms(int k, const NetworkCsi& csi, const CVec& v_common, const std::vector<CVec>& v_private,
                            const PowerParams& pw) {
  const double pc = pw.common_power();
  const double pp = pw.private_power();
  const CVec& h = csi.h_hat(k);
  SinrTerms s;
  s.noise = pw.sigma2;
  double leak = 0.0, err = 0.0, own = 0.0;
  for (std::size_t i = 0; i < v_private.size(); ++i) {
    const double g = std::norm(h.dot(v_private[i]));
    leak += g;
    if (static_cast<int>(i) == k) own = g;
    err += csi.error_quadratic(k, v_private[i]);
  }
  s.private_leakage = pp * leak;
  s.private_error = pp * err;
  s.common_numerator = pc * std::norm(h.dot(v_common));
  s.common_error = pc * csi.error_quadratic(k, v_common);
  s.sinr_common = detail::safe_ratio(s.common_numerator, s.common_denominator());

  s.private_numerator = pp * own;
  s.private_interference = pp * (leak - own);
  if (s.private_interference < 0.0) s.private_interference = 0.0;
  s.sinr_private = detail::safe_ratio(s.private_numerator, s.private_denominator());
  return s;
}

inline double sinr_common(int k, const NetworkCsi& csi, const PrecoderSet& p, const PowerParams& pw) {
  return sinr_terms(k, csi, p.v_common, p.v_private, pw).sinr_common;
}

inline double sinr_private(int k, const NetworkCsi& csi, const PrecoderSet& p, const PowerParams& pw) {
  return sinr_terms(k, csi, p.v_common, p.v_private, pw).sinr_private;
}

/// Common SINR of every UE for a candidate common precoder.
inline std::vector<double> common_sinrs(const NetworkCsi& csi, const CVec& v_common,
                                        const std::vector<CVec>& v_private, const PowerParams& pw) {
  std::vector<double> out(csi.num_ues());
  for (int k = 0; k < csi.num_ues(); ++k) out[k] = sinr_terms(k, csi, v_common, v_private, pw).sinr_common;
  return out;
}

inline double min_common_sinr(const NetworkCsi& csi, const CVec& v_common, const std::vector<CVec>& v_private,
                              const PowerParams& pw) {
  const auto s = common_sinrs(csi, v_common, v_private, pw);
  return s.empty() ? 0.0 : *std::min_element(s.begin(), s.end());
}

struct SinrBreakdown {
  std::vector<SinrTerms> per_ue;

  double min_common() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : per_ue) m = std::min(m, t.sinr_common);
    return per_ue.empty() ? 0.0 : m;
  }
};

inline SinrBreakdown sinr_breakdown(const NetworkCsi& csi, const PrecoderSet& p, const PowerParams& pw) {
  SinrBreakdown b;
  for (int k = 0; k < csi.num_ues(); ++k) b.per_ue.push_back(sinr_terms(k, csi, p.v_common, p.v_private, pw));
  return b;
}

/// Spectral efficiency of one realization: log2(1 + min_k SINR_c) and sum_k log2(1 + SINR_p).
struct RealizationSe {
  double common = 0.0;
  double priv = 0.0;
  double total() const { return common + priv; }
};

inline RealizationSe realization_se(const SinrBreakdown& b) {
  RealizationSe r;
  r.common = std::log2(1.0 + b.min_common());
  for (const auto& t : b.per_ue) r.priv += std::log2(1.0 + t.sinr_private);
  return r;
}

}  // namespace rscf
