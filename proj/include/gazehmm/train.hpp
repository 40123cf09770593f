#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gazehmm/hmm.hpp"
#include "gazehmm/model.hpp"
#include "gazehmm/rng.hpp"

namespace gazehmm {

struct TrainConfig {
  std::size_t n_states = 3;
  double dirichlet_alpha = 0.01;    // concentration for prior and transition rows
  double prior_cov_std = 14.0;      // sigma0, pixels
  double prior_cov_strength = 1.0;  // nu0 pseudo-observations of sigma0^2 I
  std::size_t max_iters = 200;
  double tol = 1e-6;                // relative objective change
  std::size_t n_restarts = 5;
  std::uint64_t seed = 1;
};

struct FitResult {
  GaussianHmm model;
  double objective = kNegInf;
  std::vector<double> trace;                    // winning restart
  std::vector<std::vector<double>> all_traces;  // one per restart
  std::size_t best_restart = 0;
};

namespace detail {

/// The regularizer terms the M-step updates actually ascend: Dirichlet
/// pseudo-counts alpha on every prior/transition entry and nu0 virtual
/// observations of sigma0^2 I per state covariance.
inline double map_prior_term(const GaussianHmm& m, const TrainConfig& cfg) {
  double acc = 0.0;
  for (double p : m.prior) acc += cfg.dirichlet_alpha * std::log(p);
  for (const auto& row : m.trans) {
    for (double p : row) acc += cfg.dirichlet_alpha * std::log(p);
  }
  const double s2 = cfg.prior_cov_std * cfg.prior_cov_std;
  for (const auto& st : m.states) {
    const Mat2& c = st.cov;
    const double det = c.a * c.d - c.b * c.c;
    const double inv_trace = (c.a + c.d) / det;
    acc += -0.5 * cfg.prior_cov_strength * (std::log(det) + s2 * inv_trace);
  }
  return acc;
}

/// k-means++ style seeding over the pooled observations.
inline std::vector<Vec2> seed_means(const std::vector<Vec2>& pool, std::size_t k_n, Rng& rng) {
  std::vector<Vec2> centers;
  centers.push_back(pool[static_cast<std::size_t>(rng.uniform() * static_cast<double>(pool.size())) %
                         pool.size()]);
  std::vector<double> d2(pool.size());
  while (centers.size() < k_n) {
    double total = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& c : centers) {
        const Vec2 r = pool[i] - c;
        best = std::min(best, dot(r, r));
      }
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(pool.size())) % pool.size();
    } else {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = pool.size() - 1;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pool[pick]);
  }
  return centers;
}

inline GaussianHmm initial_model(const std::vector<Vec2>& pool, const TrainConfig& cfg, Rng& rng) {
  const std::size_t k_n = cfg.n_states;
  GaussianHmm m;
  m.prior.assign(k_n, 1.0 / static_cast<double>(k_n));
  m.trans.assign(k_n, std::vector<double>(k_n, k_n > 1 ? 0.2 / static_cast<double>(k_n - 1) : 0.0));
  for (std::size_t j = 0; j < k_n; ++j) m.trans[j][j] = k_n > 1 ? 0.8 : 1.0;
  const auto centers = seed_means(pool, k_n, rng);
  const Mat2 cov0 = Mat2::isotropic(cfg.prior_cov_std * cfg.prior_cov_std);
  for (std::size_t k = 0; k < k_n; ++k) m.states.push_back({centers[k], cov0});
  return m;
}

}  // namespace detail

/// MAP Baum-Welch over multiple observation sequences with multiple
/// restarts. Transition/prior updates use the posterior-mean form
/// (count + alpha) / (total + K alpha), which stays strictly positive for
/// alpha < 1; covariances shrink toward sigma0^2 I with strength nu0.
inline FitResult fit_map(const std::vector<ObservationSequence>& sequences,
                         const TrainConfig& cfg = {}) {
  if (sequences.empty()) throw std::invalid_argument("fit_map: no sequences");
  if (cfg.n_states == 0) throw std::invalid_argument("fit_map: n_states must be positive");
  if (cfg.dirichlet_alpha <= 0.0 || cfg.prior_cov_std <= 0.0 || cfg.prior_cov_strength < 0.0) {
    throw std::invalid_argument("fit_map: invalid prior configuration");
  }
  std::vector<Vec2> pool;
  for (const auto& seq : sequences) {
    if (seq.empty()) throw std::invalid_argument("fit_map: empty sequence");
    pool.insert(pool.end(), seq.begin(), seq.end());
  }
  if (pool.size() < cfg.n_states) {
    throw std::invalid_argument("fit_map: fewer observations than states");
  }

  const std::size_t k_n = cfg.n_states;
  const double alpha = cfg.dirichlet_alpha;
  const double nu0 = cfg.prior_cov_strength;
  const double s2 = cfg.prior_cov_std * cfg.prior_cov_std;
  const double n_seq = static_cast<double>(sequences.size());

  FitResult best;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, cfg.n_restarts); ++restart) {
    Rng rng(cfg.seed + 0x9E3779B97F4A7C15ULL * (restart + 1));
    GaussianHmm m = detail::initial_model(pool, cfg, rng);

    std::vector<double> trace;
    std::vector<double> occupancy(k_n, 0.0);
    std::vector<std::vector<double>> gammas(sequences.size());
    double prev = kNegInf;

    for (std::size_t iter = 0; iter <= cfg.max_iters; ++iter) {
      // E-step; also evaluates the objective at the current parameters.
      double loglik = 0.0;
      std::vector<double> g1(k_n, 0.0);
      std::vector<double> xi_sum(k_n * k_n, 0.0);
      std::fill(occupancy.begin(), occupancy.end(), 0.0);
      for (std::size_t s = 0; s < sequences.size(); ++s) {
        Posteriors post = posteriors(m, sequences[s]);
        loglik += post.loglik;
        const std::size_t t_n = sequences[s].size();
        for (std::size_t k = 0; k < k_n; ++k) g1[k] += post.gamma[k];
        for (std::size_t t = 0; t < t_n; ++t) {
          for (std::size_t k = 0; k < k_n; ++k) occupancy[k] += post.gamma[t * k_n + k];
        }
        for (std::size_t i = 0; i < post.xi.size(); ++i) xi_sum[i % (k_n * k_n)] += post.xi[i];
        gammas[s] = std::move(post.gamma);
      }
      const double objective = loglik + detail::map_prior_term(m, cfg);
      trace.push_back(objective);
      const bool converged =
          iter > 0 && std::abs(objective - prev) <= cfg.tol * std::max(1.0, std::abs(objective));
      prev = objective;
      if (converged || iter == cfg.max_iters) break;

      // M-step
      for (std::size_t k = 0; k < k_n; ++k) {
        m.prior[k] = (g1[k] + alpha) / (n_seq + static_cast<double>(k_n) * alpha);
      }
      for (std::size_t j = 0; j < k_n; ++j) {
        double row = 0.0;
        for (std::size_t k = 0; k < k_n; ++k) row += xi_sum[j * k_n + k];
        for (std::size_t k = 0; k < k_n; ++k) {
          m.trans[j][k] = (xi_sum[j * k_n + k] + alpha) / (row + static_cast<double>(k_n) * alpha);
        }
      }
      for (std::size_t k = 0; k < k_n; ++k) {
        if (occupancy[k] > 1e-12) {
          Vec2 acc{0.0, 0.0};
          for (std::size_t s = 0; s < sequences.size(); ++s) {
            for (std::size_t t = 0; t < sequences[s].size(); ++t) {
              acc = acc + gammas[s][t * k_n + k] * sequences[s][t];
            }
          }
          m.states[k].mean = (1.0 / occupancy[k]) * acc;
        }
        Mat2 scatter{0.0, 0.0, 0.0, 0.0};
        for (std::size_t s = 0; s < sequences.size(); ++s) {
          for (std::size_t t = 0; t < sequences[s].size(); ++t) {
            const Vec2 r = sequences[s][t] - m.states[k].mean;
            scatter = scatter + gammas[s][t * k_n + k] * outer(r);
          }
        }
        const double denom = std::max(occupancy[k] + nu0, 1e-12);
        Mat2 cov = (1.0 / denom) * (scatter + (nu0 * s2) * Mat2::identity());
        m.states[k].cov = detail::floor_eigenvalues(cov, kCovEigFloor);
      }
    }

    detail::reorder_by_occupancy(m, occupancy);
    best.all_traces.push_back(trace);
    if (trace.back() > best.objective) {
      best.objective = trace.back();
      best.model = m;
      best.trace = std::move(trace);
      best.best_restart = restart;
    }
  }
  return best;
}

}  // namespace gazehmm
