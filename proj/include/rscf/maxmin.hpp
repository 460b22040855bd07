#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "channel.hpp"
#include "precoding.hpp"
#include "sinr.hpp"

namespace rscf {

/// kappa_k: private leakage, private error leakage and noise seen by the
/// common message of UE k. Does not depend on the common precoder.
inline std::vector<double> compute_kappa(const std::vector<CVec>& v_private, const NetworkCsi& csi,
                                         const PowerParams& pw) {
  std::vector<double> kappa(csi.num_ues());
  const double pp = pw.private_power();
  for (int k = 0; k < csi.num_ues(); ++k) {
    double leak = 0.0, err = 0.0;
    for (const auto& v : v_private) {
      leak += std::norm(csi.h_hat(k).dot(v));
      err += csi.error_quadratic(k, v);
    }
    kappa[k] = pp * leak + pp * err + pw.sigma2;
  }
  return kappa;
}

/// Second-order-cone feasibility program of one bisection step:
///   sqrt(p t) Re(h_k^H v) >= sqrt(gamma) ||u_k(v)||  for all k,
///   ||v_l||^2 <= 1                                      for all APs l,
/// with u_k(v) = [sqrt(p t) C_k^{1/2} v ; sqrt(kappa_k)].
struct FeasibilityProblem {
  std::vector<CVec> h_hat;
  Grid2<CMat> c_half;  // K x L diagonal blocks of C_k^{1/2}
  std::vector<double> kappa;
  double common_power = 0.0;  // p_d t
  int num_aps = 0;
  int antennas = 0;
  double gamma = 0.0;

  int num_ues() const { return static_cast<int>(h_hat.size()); }
  int dim() const { return num_aps * antennas; }

  /// Dense LN x LN C_k^{1/2}.
  CMat c_half_dense(int k) const {
    CMat c = CMat::Zero(dim(), dim());
    for (int l = 0; l < num_aps; ++l) c.block(l * antennas, l * antennas, antennas, antennas) = c_half(k, l);
    return c;
  }

  /// Magnitude that feasibility tolerances are measured against.
  double scale() const {
    double a = 0.0, b = 0.0;
    for (int k = 0; k < num_ues(); ++k) {
      a = std::max(a, std::sqrt(kappa[k]));
      double s = 0.0;
      for (int l = 0; l < num_aps; ++l) s += h_hat[k].segment(static_cast<Eigen::Index>(l) * antennas, antennas).norm();
      b = std::max(b, s);
    }
    return std::sqrt(gamma) * a + std::sqrt(common_power) * b;
  }
};

inline FeasibilityProblem make_feasibility_problem(const NetworkCsi& csi, std::vector<double> kappa,
                                                   const PowerParams& pw, double gamma = 0.0) {
  FeasibilityProblem p;
  const int K = csi.num_ues(), L = csi.num_aps();
  for (int k = 0; k < K; ++k) p.h_hat.push_back(csi.h_hat(k));
  p.c_half = Grid2<CMat>(K, L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) p.c_half(k, l) = hermitian_sqrt(csi.c_block(k, l));
  p.kappa = std::move(kappa);
  p.common_power = pw.common_power();
  p.num_aps = L;
  p.antennas = csi.antennas();
  p.gamma = gamma;
  return p;
}

/// Complex multiplications needed for one evaluation of all constraints with a
/// dense C^{1/2}: (2K + 1) L N + K (L^2 N^2 + 1).
inline std::int64_t constraint_cost_model(int K, int L, int N) {
  const std::int64_t ln = static_cast<std::int64_t>(L) * N;
  return (2 * K + 1) * ln + K * (ln * ln + 1);
}

enum class EvalMode { block, dense };

/// Values of the constraint functions f_k(v) = sqrt(gamma)||u_k|| - sqrt(p t) Re(h_k^H v).
struct ConstraintValues {
  std::vector<double> f;
  std::vector<double> u_norm;
  std::vector<CVec> c_half_v;  // C_k^{1/2} v
  std::vector<double> block_norm_sq;
  double max_violation() const { return f.empty() ? 0.0 : *std::max_element(f.begin(), f.end()); }
};

/// Evaluates every SOC constraint at v, counting complex multiplications in `mults`.
inline ConstraintValues evaluate_constraints(const FeasibilityProblem& p, const CVec& v, EvalMode mode = EvalMode::block,
                                             std::int64_t* mults = nullptr) {
  const int K = p.num_ues(), L = p.num_aps, N = p.antennas;
  const std::int64_t ln = static_cast<std::int64_t>(L) * N;
  const double sg = std::sqrt(p.gamma), sp = std::sqrt(p.common_power);
  std::int64_t count = 0;
  ConstraintValues out;
  out.f.resize(K);
  out.u_norm.resize(K);
  out.c_half_v.resize(K);
  for (int k = 0; k < K; ++k) {
    const cplx a = p.h_hat[k].dot(v);
    count += ln;
    CVec w(ln);
    if (mode == EvalMode::dense) {
      w = p.c_half_dense(k) * v;
      count += ln * ln;
    } else {
      for (int l = 0; l < L; ++l)
        w.segment(static_cast<Eigen::Index>(l) * N, N) = p.c_half(k, l) * v.segment(static_cast<Eigen::Index>(l) * N, N);
      count += ln * N;
    }
    const double u2 = p.common_power * w.squaredNorm() + p.kappa[k];
    count += ln;
    out.u_norm[k] = std::sqrt(u2);
    out.f[k] = sg * out.u_norm[k] - sp * a.real();
    count += 1;
    out.c_half_v[k] = std::move(w);
  }
  out.block_norm_sq = block_norms_sq(v, L, N);
  count += ln;
  if (mults) *mults += count;
  return out;
}

/// Gradient of f_k (as the complex vector g with df = Re(g^H dv)).
inline CVec constraint_gradient(const FeasibilityProblem& p, const ConstraintValues& cv, int k) {
  const int L = p.num_aps, N = p.antennas;
  const double sg = std::sqrt(p.gamma), sp = std::sqrt(p.common_power);
  CVec g = -sp * p.h_hat[k];
  if (cv.u_norm[k] > 0.0 && p.common_power > 0.0) {
    const double s = sg * p.common_power / cv.u_norm[k];
    for (int l = 0; l < L; ++l)
      g.segment(static_cast<Eigen::Index>(l) * N, N) +=
          s * (p.c_half(k, l) * cv.c_half_v[k].segment(static_cast<Eigen::Index>(l) * N, N));
  }
  return g;
}

/// Projection onto the product of unit balls, one per AP block.
inline void project_per_ap(CVec& v, int num_aps, int antennas) {
  for (int l = 0; l < num_aps; ++l) {
    auto blk = v.segment(static_cast<Eigen::Index>(l) * antennas, antennas);
    const double n = blk.norm();
    if (n > 1.0) blk /= n;
  }
}

/// Lower bound on min_v max_k f_k(v) over the per-AP balls, from simplex
/// weights `lambda` and the linearization of the cones at v_bar.
inline double feasibility_lower_bound(const FeasibilityProblem& p, const ConstraintValues& at_vbar,
                                      const std::vector<double>& lambda) {
  const int K = p.num_ues(), L = p.num_aps, N = p.antennas;
  const double sg = std::sqrt(p.gamma);
  CVec d = CVec::Zero(p.dim());
  double constant = 0.0;
  for (int k = 0; k < K; ++k) {
    if (lambda[k] == 0.0) continue;
    d += lambda[k] * constraint_gradient(p, at_vbar, k);
    if (at_vbar.u_norm[k] > 0.0) constant += lambda[k] * sg * p.kappa[k] / at_vbar.u_norm[k];
  }
  double lin = 0.0;
  for (int l = 0; l < L; ++l) lin += d.segment(static_cast<Eigen::Index>(l) * N, N).norm();
  return constant - lin;
}

struct FeasibilityOptions {
  int max_iter = 10000;
  double tol = 1e-6;  // relative to FeasibilityProblem::scale()
};

struct FeasibilityResult {
  bool feasible = false;
  /// Infeasibility proven by the lower bound (as opposed to budget exhaustion).
  bool certified = false;
  CVec v;
  double max_violation = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::int64_t mults = 0;
};

namespace detail {

struct Smoothed {
  double value = 0.0;
  CVec grad;
  std::vector<double> lambda;
  ConstraintValues cv;
};

inline Smoothed smoothed_max(const FeasibilityProblem& p, const CVec& v, double mu, std::int64_t* mults) {
  Smoothed s;
  s.cv = evaluate_constraints(p, v, EvalMode::block, mults);
  const int K = p.num_ues();
  const double fmax = s.cv.max_violation();
  s.lambda.assign(K, 0.0);
  double z = 0.0;
  for (int k = 0; k < K; ++k) {
    s.lambda[k] = std::exp((s.cv.f[k] - fmax) / mu);
    z += s.lambda[k];
  }
  for (auto& x : s.lambda) x /= z;
  s.value = fmax + mu * std::log(z);
  s.grad = CVec::Zero(p.dim());
  for (int k = 0; k < K; ++k)
    if (s.lambda[k] > 1e-300) s.grad += s.lambda[k] * constraint_gradient(p, s.cv, k);
  return s;
}

}  // namespace detail

/// Decides the feasibility program by minimizing the largest constraint
/// violation s = max_k f_k(v) over the per-AP balls. The max is smoothed by a
/// log-sum-exp with a decreasing temperature and minimized by accelerated
/// projected gradient with backtracking. Stops on a primal certificate
/// (s <= tol), a dual certificate (lower bound > tol) or the iteration cap,
/// which counts as infeasible.
inline FeasibilityResult check_feasibility(const FeasibilityProblem& p, const FeasibilityOptions& opt = {},
                                           const CVec* warm_start = nullptr) {
  const int L = p.num_aps, N = p.antennas, K = p.num_ues();
  FeasibilityResult res;
  res.v = CVec::Zero(p.dim());
  if (p.gamma <= 0.0) {
    res.feasible = true;
    res.max_violation = 0.0;
    return res;
  }
  const double scale = p.scale();
  const double tol = opt.tol * scale;

  CVec x;
  if (warm_start && warm_start->size() == p.dim()) {
    x = *warm_start;
  } else {
    x = CVec::Zero(p.dim());
    for (const auto& h : p.h_hat) x += h / std::max(h.norm(), 1e-300);
  }
  project_per_ap(x, L, N);

  double mu = std::max(1e-2 * scale, tol);
  const double mu_min = tol / (1.0 + std::log(std::max(K, 2)));
  const double diam = 2.0 * std::sqrt(static_cast<double>(L));
  double lip = 1.0 / std::max(scale, 1e-300);

  auto cur = detail::smoothed_max(p, x, mu, &res.mults);
  CVec y = x;
  auto at_y = cur;
  double tk = 1.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    res.iterations = it;
    CVec xn;
    detail::Smoothed next;
    for (int bt = 0; bt < 60; ++bt) {
      xn = y - at_y.grad / lip;
      project_per_ap(xn, L, N);
      next = detail::smoothed_max(p, xn, mu, &res.mults);
      const CVec step = xn - y;
      const double model = at_y.value + at_y.grad.dot(step).real() + 0.5 * lip * step.squaredNorm();
      if (next.value <= model + 1e-14 * std::abs(at_y.value)) break;
      lip *= 2.0;
    }
    const double viol = next.cv.max_violation();
    if (viol < res.max_violation) {
      res.max_violation = viol;
      res.v = xn;
    }
    if (viol <= tol) {
      res.feasible = true;
      return res;
    }
    res.lower_bound = std::max(res.lower_bound, feasibility_lower_bound(p, next.cv, next.lambda));
    if (res.lower_bound > tol) {
      res.certified = true;
      return res;
    }

    const double gmap = lip * (xn - y).norm();
    if (next.value > cur.value) {
      // Adaptive restart of the momentum.
      tk = 1.0;
      y = xn;
      at_y = next;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      y = xn + ((tk - 1.0) / tn) * (xn - x);
      tk = tn;
      project_per_ap(y, L, N);
      at_y = detail::smoothed_max(p, y, mu, &res.mults);
    }
    x = xn;
    cur = std::move(next);
    lip *= 0.95;

    if (gmap * diam < mu && mu > mu_min) {
      mu = std::max(0.25 * mu, mu_min);
      cur = detail::smoothed_max(p, x, mu, &res.mults);
      y = x;
      at_y = cur;
      tk = 1.0;
    }
  }
  return res;
}

struct BisectionOptions {
  /// Tolerance relative to the initial upper bracket gamma_max^0.
  double epsilon_rel = 1e-3;
  /// Absolute tolerance; overrides epsilon_rel when > 0.
  double epsilon_abs = 0.0;
  int max_iter = 200;
  FeasibilityOptions inner;

  void validate() const {
    require(epsilon_rel > 0.0 || epsilon_abs > 0.0, "bisection: epsilon must be positive");
    require(epsilon_rel >= 0.0 && epsilon_abs >= 0.0, "bisection: epsilon must be positive");
    require(max_iter >= 1 && inner.max_iter >= 1 && inner.tol > 0.0, "bisection: iteration limits must be positive");
  }
};

enum class CommonCandidate { bisection, superposition, random };

inline std::string to_string(CommonCandidate c) {
  switch (c) {
    case CommonCandidate::bisection: return "bisection";
    case CommonCandidate::superposition: return "superposition";
    case CommonCandidate::random: return "random";
  }
  return "?";
}

struct BisectionResult {
  CVec v_common;
  double gamma_star = 0.0;  // min_k common SINR of v_common
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double gamma_max0 = 0.0;
  double epsilon = 0.0;
  int iterations = 0;
  bool converged = false;
  CommonCandidate selected = CommonCandidate::bisection;
  std::int64_t mults = 0;

  /// ceil(log2(gamma_max0 / epsilon)), the bisection step bound.
  int iteration_bound() const {
    if (!(gamma_max0 > epsilon) || epsilon <= 0.0) return 0;
    return static_cast<int>(std::ceil(std::log2(gamma_max0 / epsilon)));
  }
};

/// Analytic per-UE ceiling on the common SINR: p t (sum_l ||h_kl||)^2 / kappa_k,
/// attained only without error leakage; its minimum over k bounds the max-min value.
inline double max_min_upper_bound(const FeasibilityProblem& p) {
  double ub = std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.num_ues(); ++k) {
    double s = 0.0;
    for (int l = 0; l < p.num_aps; ++l)
      s += p.h_hat[k].segment(static_cast<Eigen::Index>(l) * p.antennas, p.antennas).norm();
    ub = std::min(ub, p.common_power * s * s / p.kappa[k]);
  }
  return p.num_ues() ? ub : 0.0;
}

/// Max-min common precoder by bisection over the common SINR level.
///
/// `base` supplies the normalized private precoders and the superposition
/// common precoder. The returned precoder is the best of the bisection
/// solution, the superposition precoder and the random precoder by
/// recomputed minimum common SINR.
inline BisectionResult bisection_common(const NetworkCsi& csi, const PrecoderSet& base, const PowerParams& pw,
                                        const BisectionOptions& opt = {}) {
  opt.validate();
  BisectionResult res;
  auto problem = make_feasibility_problem(csi, compute_kappa(base.v_private, csi, pw), pw);

  const auto sup = common_sinrs(csi, base.v_common, base.v_private, pw);
  const double sup_max = sup.empty() ? 0.0 : *std::max_element(sup.begin(), sup.end());
  const double ub = max_min_upper_bound(problem);
  res.gamma_max0 = sup_max > 0.0 ? std::min(10.0 * sup_max, ub) : ub;
  res.epsilon = opt.epsilon_abs > 0.0 ? opt.epsilon_abs : opt.epsilon_rel * res.gamma_max0;

  double lo = 0.0, hi = res.gamma_max0;
  CVec best = CVec::Zero(csi.dim());
  std::optional<CVec> warm;
  if (!base.common_degenerate && base.v_common.squaredNorm() > 0.0) {
    CVec w = base.v_common;
    project_per_ap(w, csi.num_aps(), csi.antennas());
    warm = w;
  }
  if (res.gamma_max0 > 0.0 && res.epsilon > 0.0) {
    while (hi - lo > res.epsilon && res.iterations < opt.max_iter) {
      const double gamma = 0.5 * (lo + hi);
      problem.gamma = gamma;
      auto r = check_feasibility(problem, opt.inner, warm ? &*warm : nullptr);
      res.mults += r.mults;
      ++res.iterations;
      if (r.feasible) {
        lo = gamma;
        best = r.v;
        warm = r.v;
      } else {
        hi = gamma;
      }
    }
    res.converged = hi - lo <= res.epsilon;
  } else {
    res.converged = true;
  }
  res.gamma_min = lo;
  res.gamma_max = hi;

  CVec random(csi.dim());
  for (int l = 0; l < csi.num_aps(); ++l)
    random.segment(static_cast<Eigen::Index>(l) * csi.antennas(), csi.antennas()) = random_common(csi.antennas());

  const double s_bis = min_common_sinr(csi, best, base.v_private, pw);
  const double s_sup = min_common_sinr(csi, base.v_common, base.v_private, pw);
  const double s_rnd = min_common_sinr(csi, random, base.v_private, pw);
  res.v_common = best;
  res.gamma_star = s_bis;
  res.selected = CommonCandidate::bisection;
  if (s_sup > res.gamma_star) {
    res.v_common = base.v_common;
    res.gamma_star = s_sup;
    res.selected = CommonCandidate::superposition;
  }
  if (s_rnd > res.gamma_star) {
    res.v_common = random;
    res.gamma_star = s_rnd;
    res.selected = CommonCandidate::random;
  }
  return res;
}

/// Precoder set whose common precoder is the bisection result.
inline PrecoderSet with_bisection_common(const PrecoderSet& base, const BisectionResult& r) {
  PrecoderSet p = base;
  p.v_common = r.v_common;
  p.common_scheme = CommonScheme::bisection;
  return p;
}

}  // namespace rscf
