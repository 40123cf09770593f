#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "gazehmm/model.hpp"
#include "gazehmm/rng.hpp"
#include "gazehmm/types.hpp"

namespace gazehmm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093453;

inline double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// log N(point; mean, cov) for a 2D Gaussian.
inline double gaussian_logpdf(Vec2 point, Vec2 mean, const Mat2& cov) {
  const double off = 0.5 * (cov.b + cov.c);
  const double det = cov.a * cov.d - off * off;
  if (!(det > 0.0) || !(cov.a > 0.0)) {
    throw std::runtime_error("gaussian_logpdf: covariance not positive definite");
  }
  const Vec2 r = point - mean;
  const Mat2 inv{cov.d / det, -off / det, -off / det, cov.a / det};
  return -kLog2Pi - 0.5 * std::log(det) - 0.5 * quad_form(inv, r);
}

namespace detail {

/// Per-state emission log-densities for one sequence, T x K row-major.
inline std::vector<double> emission_table(const GaussianHmm& m, const ObservationSequence& seq) {
  const std::size_t k_n = m.n_states();
  std::vector<double> out(seq.size() * k_n);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (std::size_t k = 0; k < k_n; ++k) {
      out[t * k_n + k] = gaussian_logpdf(seq[t], m.states[k].mean, m.states[k].cov);
    }
  }
  return out;
}

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

inline void require_sequence(const GaussianHmm& m, const ObservationSequence& seq) {
  if (seq.empty()) throw std::invalid_argument("hmm: empty observation sequence");
  if (m.n_states() == 0) throw std::invalid_argument("hmm: model has no states");
  for (const Vec2& p : seq) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("hmm: non-finite observation");
    }
  }
}

}  // namespace detail

/// Exact marginal log p(seq | model) by the forward recursion. Returns -inf
/// only when exact-zero priors/transitions rule out every path.
inline double log_likelihood(const GaussianHmm& m, const ObservationSequence& seq) {
  detail::require_sequence(m, seq);
  const std::size_t k_n = m.n_states();
  const auto logb = detail::emission_table(m, seq);
  std::vector<double> alpha(k_n), next(k_n), work(k_n);
  for (std::size_t k = 0; k < k_n; ++k) alpha[k] = detail::safe_log(m.prior[k]) + logb[k];
  for (std::size_t t = 1; t < seq.size(); ++t) {
    for (std::size_t k = 0; k < k_n; ++k) {
      for (std::size_t j = 0; j < k_n; ++j) work[j] = alpha[j] + detail::safe_log(m.trans[j][k]);
      next[k] = log_sum_exp(work) + logb[t * k_n + k];
    }
    alpha.swap(next);
  }
  return log_sum_exp(alpha);
}

struct ViterbiResult {
  std::vector<std::size_t> path;
  double log_joint = 0.0;
};

/// Most probable state path; ties resolve toward the lower state index at
/// every backtrack step.
inline ViterbiResult viterbi(const GaussianHmm& m, const ObservationSequence& seq) {
  detail::require_sequence(m, seq);
  const std::size_t k_n = m.n_states();
  const std::size_t t_n = seq.size();
  const auto logb = detail::emission_table(m, seq);
  std::vector<double> delta(t_n * k_n, kNegInf);
  std::vector<std::size_t> back(t_n * k_n, 0);
  for (std::size_t k = 0; k < k_n; ++k) delta[k] = detail::safe_log(m.prior[k]) + logb[k];
  for (std::size_t t = 1; t < t_n; ++t) {
    for (std::size_t k = 0; k < k_n; ++k) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t j = 0; j < k_n; ++j) {
        const double cand = delta[(t - 1) * k_n + j] + detail::safe_log(m.trans[j][k]);
        if (cand > best) {
          best = cand;
          arg = j;
        }
      }
      delta[t * k_n + k] = best + logb[t * k_n + k];
      back[t * k_n + k] = arg;
    }
  }
  double best = kNegInf;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < k_n; ++k) {
    if (delta[(t_n - 1) * k_n + k] > best) {
      best = delta[(t_n - 1) * k_n + k];
      arg = k;
    }
  }
  if (best == kNegInf) throw std::runtime_error("viterbi: no admissible path");
  ViterbiResult res;
  res.log_joint = best;
  res.path.resize(t_n);
  res.path[t_n - 1] = arg;
  for (std::size_t t = t_n - 1; t > 0; --t) {
    res.path[t - 1] = back[t * k_n + res.path[t]];
  }
  return res;
}

struct Posteriors {
  std::vector<double> gamma;  // T x K row-major; rows sum to 1
  std::vector<double> xi;     // (T-1) x K x K; each slice sums to 1
  double loglik = 0.0;
};

/// Forward-backward smoothing. gamma rows for t < T are the row-marginals of
/// the xi slices, so the marginalization identity holds to machine precision.
inline Posteriors posteriors(const GaussianHmm& m, const ObservationSequence& seq) {
  detail::require_sequence(m, seq);
  const std::size_t k_n = m.n_states();
  const std::size_t t_n = seq.size();
  const auto logb = detail::emission_table(m, seq);

  std::vector<double> log_alpha(t_n * k_n), log_beta(t_n * k_n, 0.0), work(k_n);
  for (std::size_t k = 0; k < k_n; ++k) log_alpha[k] = detail::safe_log(m.prior[k]) + logb[k];
  for (std::size_t t = 1; t < t_n; ++t) {
    for (std::size_t k = 0; k < k_n; ++k) {
      for (std::size_t j = 0; j < k_n; ++j) {
        work[j] = log_alpha[(t - 1) * k_n + j] + detail::safe_log(m.trans[j][k]);
      }
      log_alpha[t * k_n + k] = log_sum_exp(work) + logb[t * k_n + k];
    }
  }
  for (std::size_t t = t_n - 1; t > 0; --t) {
    for (std::size_t j = 0; j < k_n; ++j) {
      for (std::size_t k = 0; k < k_n; ++k) {
        work[k] = detail::safe_log(m.trans[j][k]) + logb[t * k_n + k] + log_beta[t * k_n + k];
      }
      log_beta[(t - 1) * k_n + j] = log_sum_exp(work);
    }
  }
  Posteriors out;
  {
    std::vector<double> last(log_alpha.end() - static_cast<long>(k_n), log_alpha.end());
    out.loglik = log_sum_exp(last);
  }
  if (out.loglik == kNegInf) throw std::runtime_error("posteriors: sequence impossible under model");

  out.gamma.assign(t_n * k_n, 0.0);
  out.xi.assign(t_n > 1 ? (t_n - 1) * k_n * k_n : 0, 0.0);
  for (std::size_t t = 0; t + 1 < t_n; ++t) {
    double* slice = out.xi.data() + t * k_n * k_n;
    double total = 0.0;
    for (std::size_t j = 0; j < k_n; ++j) {
      for (std::size_t k = 0; k < k_n; ++k) {
        const double lg = log_alpha[t * k_n + j] + detail::safe_log(m.trans[j][k]) +
                          logb[(t + 1) * k_n + k] + log_beta[(t + 1) * k_n + k] - out.loglik;
        const double v = std::exp(lg);
        slice[j * k_n + k] = v;
        total += v;
      }
    }
    if (!(total > 0.0)) throw std::runtime_error("posteriors: numerical underflow in xi");
    for (std::size_t i = 0; i < k_n * k_n; ++i) slice[i] /= total;
    for (std::size_t j = 0; j < k_n; ++j) {
      double row = 0.0;
      for (std::size_t k = 0; k < k_n; ++k) row += slice[j * k_n + k];
      out.gamma[t * k_n + j] = row;
    }
  }
  {
    // last time step (and the T = 1 case) from the smoothed marginal
    const std::size_t t = t_n - 1;
    double total = 0.0;
    for (std::size_t k = 0; k < k_n; ++k) {
      const double v = std::exp(log_alpha[t * k_n + k] + log_beta[t * k_n + k] - out.loglik);
      out.gamma[t * k_n + k] = v;
      total += v;
    }
    if (!(total > 0.0)) throw std::runtime_error("posteriors: numerical underflow in gamma");
    for (std::size_t k = 0; k < k_n; ++k) out.gamma[t * k_n + k] /= total;
  }
  return out;
}

struct SampledSequence {
  ObservationSequence points;
  std::vector<std::size_t> states;
};

inline SampledSequence sample(const GaussianHmm& m, std::size_t t_n, Rng& rng) {
  if (t_n == 0) throw std::invalid_argument("sample: T must be at least 1");
  SampledSequence out;
  out.points.reserve(t_n);
  out.states.reserve(t_n);
  std::size_t s = rng.categorical(m.prior);
  for (std::size_t t = 0; t < t_n; ++t) {
    if (t > 0) s = rng.categorical(m.trans[s]);
    out.states.push_back(s);
    out.points.push_back(rng.gaussian2(m.states[s].mean, m.states[s].cov));
  }
  return out;
}

/// Ancestral sampling; deterministic per seed.
inline SampledSequence sample(const GaussianHmm& m, std::size_t t_n, std::uint64_t seed) {
  Rng rng(seed);
  return sample(m, t_n, rng);
}

/// P(s_t = k) for t = 1..T under the bare chain (no observations);
/// row-major T x K.
inline std::vector<double> chain_marginals(const GaussianHmm& m, std::size_t t_n) {
  const std::size_t k_n = m.n_states();
  std::vector<double> out(t_n * k_n, 0.0);
  for (std::size_t k = 0; k < k_n; ++k) out[k] = m.prior[k];
  for (std::size_t t = 1; t < t_n; ++t) {
    for (std::size_t k = 0; k < k_n; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k_n; ++j) acc += out[(t - 1) * k_n + j] * m.trans[j][k];
      out[t * k_n + k] = acc;
    }
  }
  return out;
}

}  // namespace gazehmm
