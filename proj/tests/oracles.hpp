// Independent reference implementations the tests check the library against.
// Everything here is deliberately naive: path enumeration instead of dynamic
// programming, full-window rescans instead of incremental updates. None of it
// shares code with the implementation under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "gazehmm/fixation.hpp"
#include "gazehmm/hmm.hpp"
#include "gazehmm/model.hpp"
#include "gazehmm/rng.hpp"
#include "gazehmm/types.hpp"

namespace oracle {

using gazehmm::GaussianHmm;
using gazehmm::GazeSample;
using gazehmm::Mat2;
using gazehmm::ObservationSequence;
using gazehmm::Vec2;

inline double ref_gauss_logpdf(Vec2 y, Vec2 mu, const Mat2& cov) {
  // scalar evaluation of the 2D density formula, no shared helpers
  const double a = cov.a, b = 0.5 * (cov.b + cov.c), d = cov.d;
  const double det = a * d - b * b;
  const double dx = y.x - mu.x;
  const double dy = y.y - mu.y;
  const double quad = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
  return -std::log(2.0 * M_PI) - 0.5 * std::log(det) - 0.5 * quad;
}

inline double path_log_joint(const GaussianHmm& m, const ObservationSequence& seq,
                             const std::vector<std::size_t>& path) {
  double lp = m.prior[path[0]] > 0.0 ? std::log(m.prior[path[0]]) : gazehmm::kNegInf;
  for (std::size_t t = 1; t < path.size(); ++t) {
    const double a = m.trans[path[t - 1]][path[t]];
    lp += a > 0.0 ? std::log(a) : gazehmm::kNegInf;
  }
  if (lp == gazehmm::kNegInf) return gazehmm::kNegInf;
  for (std::size_t t = 0; t < path.size(); ++t) {
    lp += ref_gauss_logpdf(seq[t], m.states[path[t]].mean, m.states[path[t]].cov);
  }
  return lp;
}

template <typename Fn>
inline void for_each_path(std::size_t k_n, std::size_t t_n, Fn&& fn) {
  std::vector<std::size_t> path(t_n, 0);
  for (;;) {
    fn(path);
    std::size_t pos = t_n;
    while (pos > 0) {
      --pos;
      if (++path[pos] < k_n) break;
      path[pos] = 0;
      if (pos == 0) return;
    }
  }
}

/// log p(seq) by summing over all K^T paths.
inline double brute_loglik(const GaussianHmm& m, const ObservationSequence& seq) {
  std::vector<double> scores;
  for_each_path(m.n_states(), seq.size(), [&](const std::vector<std::size_t>& p) {
    const double s = path_log_joint(m, seq, p);
    if (s != gazehmm::kNegInf) scores.push_back(s);
  });
  if (scores.empty()) return gazehmm::kNegInf;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - mx);
  return mx + std::log(acc);
}

/// argmax path; ties resolve like the backtracking rule (smallest state at
/// the latest differing position).
struct BruteViterbi {
  std::vector<std::size_t> path;
  double score = gazehmm::kNegInf;
};

inline BruteViterbi brute_viterbi(const GaussianHmm& m, const ObservationSequence& seq) {
  BruteViterbi best;
  for_each_path(m.n_states(), seq.size(), [&](const std::vector<std::size_t>& p) {
    const double s = path_log_joint(m, seq, p);
    if (s == gazehmm::kNegInf) return;
    bool better = s > best.score;
    if (s == best.score && !best.path.empty()) {
      for (std::size_t i = p.size(); i > 0; --i) {
        if (p[i - 1] != best.path[i - 1]) {
          better = p[i - 1] < best.path[i - 1];
          break;
        }
      }
    }
    if (best.path.empty() || better) {
      best.path = p;
      best.score = s;
    }
  });
  return best;
}

struct BrutePosteriors {
  std::vector<double> gamma;  // T x K
  std::vector<double> xi;     // (T-1) x K x K
};

inline BrutePosteriors brute_posteriors(const GaussianHmm& m, const ObservationSequence& seq) {
  const std::size_t k_n = m.n_states();
  const std::size_t t_n = seq.size();
  std::vector<double> scores;
  std::vector<std::vector<std::size_t>> paths;
  for_each_path(k_n, t_n, [&](const std::vector<std::size_t>& p) {
    const double s = path_log_joint(m, seq, p);
    if (s == gazehmm::kNegInf) return;
    scores.push_back(s);
    paths.push_back(p);
  });
  const double mx = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  std::vector<double> w(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - mx);
    total += w[i];
  }
  BrutePosteriors out;
  out.gamma.assign(t_n * k_n, 0.0);
  out.xi.assign(t_n > 1 ? (t_n - 1) * k_n * k_n : 0, 0.0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double p = w[i] / total;
    for (std::size_t t = 0; t < t_n; ++t) out.gamma[t * k_n + paths[i][t]] += p;
    for (std::size_t t = 0; t + 1 < t_n; ++t) {
      out.xi[t * k_n * k_n + paths[i][t] * k_n + paths[i][t + 1]] += p;
    }
  }
  return out;
}

/// Quadratic re-implementation of the dispersion-threshold sweep; every
/// window dispersion is recomputed from scratch.
inline std::vector<gazehmm::Fixation> naive_idt(const std::vector<GazeSample>& samples,
                                                double dispersion_px, double min_duration_ms) {
  auto window_dispersion = [&](std::size_t lo, std::size_t hi) {
    double min_x = samples[lo].x_px, max_x = samples[lo].x_px;
    double min_y = samples[lo].y_px, max_y = samples[lo].y_px;
    for (std::size_t i = lo; i <= hi; ++i) {
      min_x = std::min(min_x, samples[i].x_px);
      max_x = std::max(max_x, samples[i].x_px);
      min_y = std::min(min_y, samples[i].y_px);
      max_y = std::max(max_y, samples[i].y_px);
    }
    return (max_x - min_x) + (max_y - min_y);
  };
  std::vector<gazehmm::Fixation> out;
  std::size_t start = 0;
  while (start < samples.size()) {
    std::size_t end = start;
    while (end < samples.size() &&
           samples[end].t_ms - samples[start].t_ms < min_duration_ms) {
      ++end;
    }
    if (end == samples.size()) break;
    if (window_dispersion(start, end) > dispersion_px) {
      ++start;
      continue;
    }
    while (end + 1 < samples.size() && window_dispersion(start, end + 1) <= dispersion_px) ++end;
    gazehmm::Fixation f;
    f.n_samples = end - start + 1;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = start; i <= end; ++i) {
      sx += samples[i].x_px;
      sy += samples[i].y_px;
    }
    f.x_px = sx / static_cast<double>(f.n_samples);
    f.y_px = sy / static_cast<double>(f.n_samples);
    f.start_ms = samples[start].t_ms;
    f.duration_ms = samples[end].t_ms - samples[start].t_ms;
    out.push_back(f);
    start = end + 1;
  }
  return out;
}

/// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<std::size_t>& a,
                                  const std::vector<std::size_t>& b) {
  const std::size_t n = a.size();
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto comb2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double sum_cells = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, v] : cells) sum_cells += comb2(v);
  for (const auto& [k, v] : ra) sum_a += comb2(v);
  for (const auto& [k, v] : rb) sum_b += comb2(v);
  const double total = comb2(static_cast<double>(n));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_cells - expected) / (max_index - expected);
}

/// Random admissible test model: stochastic rows away from zero, means in a
/// box, anisotropic SPD covariances.
inline GaussianHmm random_model(gazehmm::Rng& rng, std::size_t k_n, double mean_lo = 0.0,
                                double mean_hi = 400.0, double min_separation = 0.0) {
  GaussianHmm m;
  auto stochastic = [&](std::size_t n) {
    std::vector<double> v(n);
    double s = 0.0;
    for (double& x : v) {
      x = 0.05 + rng.uniform();
      s += x;
    }
    for (double& x : v) x /= s;
    return v;
  };
  m.prior = stochastic(k_n);
  for (std::size_t j = 0; j < k_n; ++j) m.trans.push_back(stochastic(k_n));
  for (std::size_t k = 0; k < k_n; ++k) {
    Vec2 mu;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      mu = {rng.uniform(mean_lo, mean_hi), rng.uniform(mean_lo, mean_hi)};
      bool ok = true;
      for (const auto& st : m.states) {
        ok = ok && gazehmm::norm(mu - st.mean) >= min_separation;
      }
      if (ok) break;
    }
    const double l1 = rng.uniform(60.0, 400.0);
    const double l2 = rng.uniform(60.0, 400.0);
    const double th = rng.uniform(0.0, M_PI);
    const double c = std::cos(th), s = std::sin(th);
    Mat2 cov{l1 * c * c + l2 * s * s, (l1 - l2) * c * s, (l1 - l2) * c * s,
             l1 * s * s + l2 * c * c};
    m.states.push_back({mu, cov});
  }
  return m;
}

inline ObservationSequence random_sequence(gazehmm::Rng& rng, std::size_t t_n, double lo = 0.0,
                                           double hi = 400.0) {
  ObservationSequence seq;
  for (std::size_t t = 0; t < t_n; ++t) seq.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi)});
  return seq;
}

/// Jittered copy of a fixture model: means shifted up to +-5 px uniformly,
/// transition rows resampled from Dirichlet(50 * row).
inline GaussianHmm jitter_model(const GaussianHmm& base, gazehmm::Rng& rng) {
  GaussianHmm m = base;
  for (auto& st : m.states) {
    st.mean.x += rng.uniform(-5.0, 5.0);
    st.mean.y += rng.uniform(-5.0, 5.0);
  }
  for (auto& row : m.trans) {
    std::vector<double> alpha(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) alpha[i] = std::max(1e-3, 50.0 * row[i]);
    row = rng.dirichlet(alpha);
  }
  return m;
}

}  // namespace oracle
