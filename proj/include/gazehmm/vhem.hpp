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

struct VhemConfig {
  std::size_t n_reduced = 1;     // K_r
  std::size_t virtual_len = 19;  // tau
  double virtual_count = 40.0;   // N_v virtual sequences per base model
  std::size_t max_iters = 100;
  double tol = 1e-6;
  std::size_t n_restarts = 5;
  std::uint64_t seed = 1;
};

/// Probability floor applied to reduced priors/transition rows after each
/// M-step so log-space stays finite.
inline constexpr double kVhemProbFloor = 1e-8;

/// E_{y ~ N(mb, Sb)}[log N(y; mr, Sr)] in closed form (d = 2).
inline double expected_gauss_loglik(const GaussianState& base, const GaussianState& reduced) {
  const Mat2& sr = reduced.cov;
  const double off = 0.5 * (sr.b + sr.c);
  const double det = sr.a * sr.d - off * off;
  if (!(det > 0.0) || !(sr.a > 0.0)) {
    throw std::runtime_error("expected_gauss_loglik: reduced covariance not positive definite");
  }
  const Mat2 inv{sr.d / det, -off / det, -off / det, sr.a / det};
  const Mat2& sb = base.cov;
  const double tr = inv.a * sb.a + inv.b * sb.c + inv.c * sb.b + inv.d * sb.d;
  const Vec2 r = base.mean - reduced.mean;
  return -kLog2Pi - 0.5 * std::log(det) - 0.5 * (tr + quad_form(inv, r));
}

/// Variational tables tying one base model to one reduced candidate.
/// phi1 is Kb x Kr; phit holds tau-1 tables of Kb x Kr x Kr entries,
/// phit[t-2](beta', rho, rho') for t = 2..tau.
struct ElboPair {
  double e = 0.0;  // lower bound on expected log-likelihood per virtual sequence
  std::size_t kb = 0, kr = 0, tau = 0;
  std::vector<double> phi1;
  std::vector<double> phit;

  double phi_first(std::size_t beta, std::size_t rho) const { return phi1[beta * kr + rho]; }
  double phi_step(std::size_t t, std::size_t beta_next, std::size_t rho, std::size_t rho_next) const {
    // t = 2..tau
    return phit[((t - 2) * kb + beta_next) * kr * kr + rho * kr + rho_next];
  }
};

/// Backward recursion of the expected log-likelihood lower bound between a
/// base HMM and a reduced candidate over virtual sequences of length tau.
inline ElboPair elbo_pair(const GaussianHmm& base, const GaussianHmm& reduced, std::size_t tau) {
  if (tau == 0) throw std::invalid_argument("elbo_pair: tau must be at least 1");
  const std::size_t kb = base.n_states();
  const std::size_t kr = reduced.n_states();
  ElboPair out;
  out.kb = kb;
  out.kr = kr;
  out.tau = tau;
  out.phi1.assign(kb * kr, 0.0);
  out.phit.assign(tau > 1 ? (tau - 1) * kb * kr * kr : 0, 0.0);

  std::vector<double> ell(kb * kr);
  for (std::size_t b = 0; b < kb; ++b) {
    for (std::size_t r = 0; r < kr; ++r) {
      ell[b * kr + r] = expected_gauss_loglik(base.states[b], reduced.states[r]);
    }
  }
  std::vector<double> log_ar(kr * kr), log_pr(kr);
  for (std::size_t r = 0; r < kr; ++r) {
    log_pr[r] = detail::safe_log(reduced.prior[r]);
    for (std::size_t r2 = 0; r2 < kr; ++r2) log_ar[r * kr + r2] = detail::safe_log(reduced.trans[r][r2]);
  }

  std::vector<double> l_next(kb * kr, 0.0), l_cur(kb * kr, 0.0), work(kr);
  for (std::size_t t = tau; t >= 1; --t) {
    for (std::size_t b = 0; b < kb; ++b) {
      for (std::size_t r = 0; r < kr; ++r) {
        double acc = ell[b * kr + r];
        if (t < tau) {
          for (std::size_t b2 = 0; b2 < kb; ++b2) {
            const double w = base.trans[b][b2];
            if (w == 0.0) continue;
            for (std::size_t r2 = 0; r2 < kr; ++r2) {
              work[r2] = log_ar[r * kr + r2] + l_next[b2 * kr + r2];
            }
            const double lse = log_sum_exp(work);
            acc += w * lse;
            // softmax realizing this LSE -> phi_{t+1}(rho' | rho, beta')
            double* phi = &out.phit[((t + 1 - 2) * kb + b2) * kr * kr + r * kr];
            for (std::size_t r2 = 0; r2 < kr; ++r2) phi[r2] = std::exp(work[r2] - lse);
          }
        }
        l_cur[b * kr + r] = acc;
      }
    }
    l_next = l_cur;
  }

  out.e = 0.0;
  for (std::size_t b = 0; b < kb; ++b) {
    for (std::size_t r = 0; r < kr; ++r) work[r] = log_pr[r] + l_cur[b * kr + r];
    const double lse = log_sum_exp(work);
    for (std::size_t r = 0; r < kr; ++r) out.phi1[b * kr + r] = std::exp(work[r] - lse);
    out.e += base.prior[b] * lse;
  }
  return out;
}

/// Weighted set of reduced models with soft assignments of the base models.
struct HmmMixture {
  std::vector<GaussianHmm> models;
  std::vector<double> weights;
  std::vector<std::vector<double>> assignments;  // base -> cluster responsibilities
  double elbo = kNegInf;
  std::vector<double> trace;
};

inline std::vector<std::size_t> hard_assignments(const HmmMixture& mix) {
  std::vector<std::size_t> out;
  out.reserve(mix.assignments.size());
  for (const auto& row : mix.assignments) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j] > row[arg]) arg = j;
    }
    out.push_back(arg);
  }
  return out;
}

namespace detail {

/// Normalize, floor at kVhemProbFloor, renormalize. A row with no mass at
/// all becomes uniform.
inline void floor_and_normalize(std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return;
  }
  for (double& x : v) x = std::max(x / total, kVhemProbFloor);
  renormalize(v);
}

/// Occupancy of (base-state, reduced-state) pairs over the virtual horizon.
struct PairStats {
  std::vector<double> nu_total;  // Kb x Kr, summed over t = 1..tau
  std::vector<double> nu_first;  // Kb x Kr at t = 1
  std::vector<double> a_stat;    // Kr x Kr expected reduced transitions
};

inline PairStats occupancy_stats(const GaussianHmm& base, const ElboPair& ep) {
  const std::size_t kb = ep.kb;
  const std::size_t kr = ep.kr;
  PairStats st;
  st.nu_first.assign(kb * kr, 0.0);
  st.nu_total.assign(kb * kr, 0.0);
  st.a_stat.assign(kr * kr, 0.0);

  std::vector<double> nu(kb * kr, 0.0), nu_next(kb * kr, 0.0);
  for (std::size_t b = 0; b < kb; ++b) {
    for (std::size_t r = 0; r < kr; ++r) {
      nu[b * kr + r] = base.prior[b] * ep.phi_first(b, r);
    }
  }
  st.nu_first = nu;
  for (std::size_t i = 0; i < nu.size(); ++i) st.nu_total[i] += nu[i];
  for (std::size_t t = 1; t < ep.tau; ++t) {
    std::fill(nu_next.begin(), nu_next.end(), 0.0);
    for (std::size_t b = 0; b < kb; ++b) {
      for (std::size_t r = 0; r < kr; ++r) {
        const double mass = nu[b * kr + r];
        if (mass == 0.0) continue;
        for (std::size_t b2 = 0; b2 < kb; ++b2) {
          const double w = mass * base.trans[b][b2];
          if (w == 0.0) continue;
          for (std::size_t r2 = 0; r2 < kr; ++r2) {
            const double phi = ep.phi_step(t + 1, b2, r, r2);
            nu_next[b2 * kr + r2] += w * phi;
            st.a_stat[r * kr + r2] += w * phi;
          }
        }
      }
    }
    nu = nu_next;
    for (std::size_t i = 0; i < nu.size(); ++i) st.nu_total[i] += nu[i];
  }
  return st;
}

inline std::vector<std::size_t> farthest_first_seeds(const std::vector<std::vector<double>>& dist,
                                                     const std::vector<double>& weights,
                                                     std::size_t count) {
  const std::size_t n = dist.size();
  std::vector<std::size_t> seeds;
  // most central model first
  std::size_t medoid = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += weights[j] * dist[i][j];
    if (acc < best) {
      best = acc;
      medoid = i;
    }
  }
  seeds.push_back(medoid);
  while (seeds.size() < count) {
    std::size_t arg = 0;
    double far = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double near = std::numeric_limits<double>::infinity();
      for (std::size_t s : seeds) near = std::min(near, dist[i][s]);
      if (near > far) {
        far = near;
        arg = i;
      }
    }
    seeds.push_back(arg);
  }
  return seeds;
}

}  // namespace detail

/// Variational hierarchical EM: clusters base HMMs into n_reduced
/// representative HMMs by maximizing the total expected log-likelihood lower
/// bound of N_v virtual sequences of length tau per base model.
inline HmmMixture reduce(const std::vector<GaussianHmm>& bases,
                         const std::vector<double>& base_weights, const VhemConfig& cfg) {
  if (bases.empty()) throw std::invalid_argument("reduce: no base models");
  if (cfg.n_reduced == 0 || cfg.n_reduced > bases.size()) {
    throw std::invalid_argument("reduce: n_reduced must be in [1, number of base models]");
  }
  if (cfg.virtual_len == 0 || cfg.virtual_count <= 0.0) {
    throw std::invalid_argument("reduce: virtual horizon must be positive");
  }
  std::vector<double> bw(bases.size(), 1.0);
  if (!base_weights.empty()) {
    if (base_weights.size() != bases.size()) {
      throw std::invalid_argument("reduce: base_weights length mismatch");
    }
    bw = base_weights;
  }
  detail::renormalize(bw);

  const std::size_t n = bases.size();
  const std::size_t jr = cfg.n_reduced;
  const std::size_t tau = cfg.virtual_len;
  const double nv = cfg.virtual_count;

  // symmetrized pairwise similarity for deterministic seeding
  std::vector<std::vector<double>> pair_e(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) pair_e[i][j] = elbo_pair(bases[i], bases[j], tau).e;
  }
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = -0.5 * (pair_e[i][j] + pair_e[j][i]);
  }

  HmmMixture best;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, cfg.n_restarts); ++restart) {
    Rng rng(cfg.seed + 0x9E3779B97F4A7C15ULL * (restart + 1));
    std::vector<GaussianHmm> models;
    if (restart == 0) {
      for (std::size_t s : detail::farthest_first_seeds(dist, bw, jr)) models.push_back(bases[s]);
    } else {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t j = 0; j < jr; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.uniform() *
                                                              static_cast<double>(n - j)) % (n - j);
        std::swap(idx[j], idx[pick]);
        GaussianHmm m = bases[idx[j]];
        for (auto& st : m.states) {
          st.mean.x += 2.0 * rng.normal();
          st.mean.y += 2.0 * rng.normal();
        }
        models.push_back(std::move(m));
      }
    }
    std::vector<double> omega(jr, 1.0 / static_cast<double>(jr));

    std::vector<double> trace;
    std::vector<std::vector<double>> z(n, std::vector<double>(jr, 0.0));
    std::vector<std::vector<ElboPair>> pairs(n);
    double prev = kNegInf;

    for (std::size_t iter = 0; iter <= cfg.max_iters; ++iter) {
      // E-step: per-pair bounds and cluster responsibilities
      double elbo = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        pairs[i].clear();
        std::vector<double> scores(jr);
        for (std::size_t j = 0; j < jr; ++j) {
          pairs[i].push_back(elbo_pair(bases[i], models[j], tau));
          scores[j] = detail::safe_log(omega[j]) + nv * pairs[i][j].e;
        }
        const double lse = log_sum_exp(scores);
        for (std::size_t j = 0; j < jr; ++j) z[i][j] = std::exp(scores[j] - lse);
        elbo += bw[i] * lse;
      }
      trace.push_back(elbo);
      const bool converged =
          iter > 0 && std::abs(elbo - prev) <= cfg.tol * std::max(1.0, std::abs(elbo));
      prev = elbo;
      if (converged || iter == cfg.max_iters) break;

      // M-step
      std::vector<double> omega_new(jr, 0.0);
      for (std::size_t j = 0; j < jr; ++j) {
        for (std::size_t i = 0; i < n; ++i) omega_new[j] += bw[i] * z[i][j];
      }
      detail::renormalize(omega_new);
      omega = omega_new;

      for (std::size_t j = 0; j < jr; ++j) {
        GaussianHmm& m = models[j];
        const std::size_t krj = m.n_states();
        std::vector<double> pi_stat(krj, 0.0), a_stat(krj * krj, 0.0);
        std::vector<double> w_mean(krj, 0.0);
        std::vector<Vec2> mu_acc(krj, Vec2{0.0, 0.0});
        std::vector<std::vector<double>> w_per_base(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double wz = z[i][j] * nv * bw[i];
          const auto st = detail::occupancy_stats(bases[i], pairs[i][j]);
          const std::size_t kb = bases[i].n_states();
          w_per_base[i].assign(kb * krj, 0.0);
          for (std::size_t b = 0; b < kb; ++b) {
            for (std::size_t r = 0; r < krj; ++r) {
              pi_stat[r] += wz * st.nu_first[b * krj + r];
              const double w = wz * st.nu_total[b * krj + r];
              w_per_base[i][b * krj + r] = w;
              w_mean[r] += w;
              mu_acc[r] = mu_acc[r] + w * bases[i].states[b].mean;
            }
          }
          for (std::size_t rr = 0; rr < krj * krj; ++rr) a_stat[rr] += wz * st.a_stat[rr];
        }

        detail::floor_and_normalize(pi_stat);
        m.prior = pi_stat;
        for (std::size_t r = 0; r < krj; ++r) {
          std::vector<double> row(a_stat.begin() + static_cast<long>(r * krj),
                                  a_stat.begin() + static_cast<long>((r + 1) * krj));
          detail::floor_and_normalize(row);
          m.trans[r] = row;
        }
        for (std::size_t r = 0; r < krj; ++r) {
          if (w_mean[r] > 1e-300) m.states[r].mean = (1.0 / w_mean[r]) * mu_acc[r];
          Mat2 cov_acc{0.0, 0.0, 0.0, 0.0};
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t kb = bases[i].n_states();
            for (std::size_t b = 0; b < kb; ++b) {
              const double w = w_per_base[i][b * krj + r];
              if (w == 0.0) continue;
              const Vec2 d = bases[i].states[b].mean - m.states[r].mean;
              cov_acc = cov_acc + w * (bases[i].states[b].cov + outer(d));
            }
          }
          if (w_mean[r] > 1e-300) {
            m.states[r].cov = detail::floor_eigenvalues((1.0 / w_mean[r]) * cov_acc, kCovEigFloor);
          }
        }
      }
    }

    if (trace.back() > best.elbo) {
      best.models = models;
      best.weights = omega;
      best.assignments = z;
      best.elbo = trace.back();
      best.trace = std::move(trace);
    }
  }

  // canonical reduced-state ordering by occupancy under the final tables
  for (std::size_t j = 0; j < best.models.size(); ++j) {
    std::vector<double> occ(best.models[j].n_states(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ep = elbo_pair(bases[i], best.models[j], tau);
      const auto st = detail::occupancy_stats(bases[i], ep);
      const double wz = best.assignments[i][j] * nv * bw[i];
      for (std::size_t b = 0; b < bases[i].n_states(); ++b) {
        for (std::size_t r = 0; r < occ.size(); ++r) occ[r] += wz * st.nu_total[b * occ.size() + r];
      }
    }
    detail::reorder_by_occupancy(best.models[j], occ);
  }
  return best;
}

inline HmmMixture reduce(const std::vector<GaussianHmm>& bases, const VhemConfig& cfg) {
  return reduce(bases, {}, cfg);
}

}  // namespace gazehmm
