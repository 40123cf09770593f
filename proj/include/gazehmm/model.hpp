#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazehmm/geometry.hpp"
#include "gazehmm/types.hpp"

namespace gazehmm {

/// Published probability tables carry 4 decimals, so a stochastic vector
/// may be off by up to ~1e-4 per entry.
inline constexpr double kStochasticSumTol = 5e-4;

/// Covariance eigenvalue floor used once a record is promoted to a
/// GaussianHmm (px^2).
inline constexpr double kCovEigFloor = 1e-6;

struct GaussianState {
  Vec2 mean;
  Mat2 cov = Mat2::identity();
};

/// On-disk model form. Probabilities are kept verbatim (tables keep their
/// printed values, including exact zeros); normalization happens only when
/// building a GaussianHmm.
struct ModelRecord {
  std::size_t n_states = 0;
  std::size_t dim = 2;
  std::vector<double> prior;
  std::vector<std::vector<double>> transition;
  std::vector<GaussianState> states;
  std::optional<std::string> label;
  std::vector<std::string> roi_names;  // empty = absent
  std::string meta_json;               // serialized JSON object; empty = absent
};

struct Violation {
  std::string field;   // e.g. "prior", "transition[2]", "states[1].cov"
  long index = -1;     // entry index within field, -1 when not applicable
  double observed = 0.0;
  double bound = 0.0;
  std::string message;
};

inline std::string to_string(const Violation& v) {
  std::ostringstream os;
  os << v.field;
  if (v.index >= 0) os << "[" << v.index << "]";
  os << ": " << v.message << " (observed " << v.observed << ", bound " << v.bound << ")";
  return os.str();
}

namespace detail {

inline void check_stochastic(const std::string& field, const std::vector<double>& v,
                             std::vector<Violation>& out) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      out.push_back({field, static_cast<long>(i), v[i], 0.0, "entry not finite"});
      return;
    }
    if (v[i] < 0.0) {
      out.push_back({field, static_cast<long>(i), v[i], 0.0, "entry below 0"});
    }
    sum += v[i];
  }
  if (std::abs(sum - 1.0) > kStochasticSumTol) {
    out.push_back({field, -1, sum, kStochasticSumTol, "sum deviates from 1 beyond tolerance"});
  }
}

}  // namespace detail

/// Checks every ModelRecord invariant; an empty result means the record is
/// valid. Violations are data, not errors.
inline std::vector<Violation> validate_model(const ModelRecord& m) {
  std::vector<Violation> out;
  if (m.n_states == 0) {
    out.push_back({"n_states", -1, 0.0, 1.0, "must be positive"});
    return out;
  }
  if (m.dim != 2) {
    out.push_back({"dim", -1, static_cast<double>(m.dim), 2.0, "only dim 2 is supported"});
  }
  if (m.prior.size() != m.n_states) {
    out.push_back({"prior", -1, static_cast<double>(m.prior.size()),
                   static_cast<double>(m.n_states), "length differs from n_states"});
    return out;
  }
  if (m.transition.size() != m.n_states || m.states.size() != m.n_states) {
    out.push_back({"transition/states", -1, static_cast<double>(m.transition.size()),
                   static_cast<double>(m.n_states), "row/state count differs from n_states"});
    return out;
  }
  detail::check_stochastic("prior", m.prior, out);
  for (std::size_t j = 0; j < m.n_states; ++j) {
    if (m.transition[j].size() != m.n_states) {
      out.push_back({"transition[" + std::to_string(j) + "]", -1,
                     static_cast<double>(m.transition[j].size()),
                     static_cast<double>(m.n_states), "row length differs from n_states"});
      continue;
    }
    detail::check_stochastic("transition[" + std::to_string(j) + "]", m.transition[j], out);
  }
  for (std::size_t k = 0; k < m.n_states; ++k) {
    const auto& st = m.states[k];
    const std::string base = "states[" + std::to_string(k) + "]";
    if (!std::isfinite(st.mean.x) || !std::isfinite(st.mean.y)) {
      out.push_back({base + ".mean", -1, st.mean.x, 0.0, "mean not finite"});
    }
    const Mat2& c = st.cov;
    if (!std::isfinite(c.a) || !std::isfinite(c.b) || !std::isfinite(c.c) || !std::isfinite(c.d)) {
      out.push_back({base + ".cov", -1, c.a, 0.0, "covariance not finite"});
      continue;
    }
    const double scale = std::max({std::abs(c.a), std::abs(c.b), std::abs(c.c), std::abs(c.d), 1.0});
    if (std::abs(c.b - c.c) > 1e-9 * scale) {
      out.push_back({base + ".cov", -1, c.b - c.c, 1e-9 * scale, "covariance not symmetric"});
    }
    const auto ev = sym_eigenvalues(c);
    if (!(ev[0] > 0.0)) {
      out.push_back({base + ".cov", -1, ev[0], 0.0, "minimum eigenvalue not positive"});
    }
  }
  if (!m.roi_names.empty() && m.roi_names.size() != m.n_states) {
    out.push_back({"roi_names", -1, static_cast<double>(m.roi_names.size()),
                   static_cast<double>(m.n_states), "name count differs from n_states"});
  }
  return out;
}

/// Working model form: validated, rows renormalized to sum exactly to 1,
/// covariance eigenvalues floored at kCovEigFloor. Exact zeros survive the
/// renormalization (log-space code maps them to -inf).
struct GaussianHmm {
  std::vector<double> prior;
  std::vector<std::vector<double>> trans;
  std::vector<GaussianState> states;

  std::size_t n_states() const { return prior.size(); }
};

namespace detail {

inline void renormalize(std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum <= 0.0) throw std::runtime_error("renormalize: nonpositive total");
  for (double& x : v) x /= sum;
}

inline Mat2 floor_eigenvalues(const Mat2& cov, double floor_val) {
  const SymEig e = sym_eigen(cov);
  if (e.lo >= floor_val) {
    // symmetrize only
    const double off = 0.5 * (cov.b + cov.c);
    return {cov.a, off, off, cov.d};
  }
  const double lo = std::max(e.lo, floor_val);
  const double hi = std::max(e.hi, floor_val);
  const Vec2 u = e.hi_axis;
  const Vec2 w{-u.y, u.x};
  Mat2 out = hi * outer(u) + lo * outer(w);
  const double off = 0.5 * (out.b + out.c);
  out.b = out.c = off;
  return out;
}

}  // namespace detail

inline GaussianHmm to_hmm(const ModelRecord& rec) {
  const auto violations = validate_model(rec);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid model record:";
    for (const auto& v : violations) os << "\n  " << to_string(v);
    throw std::runtime_error(os.str());
  }
  GaussianHmm h;
  h.prior = rec.prior;
  detail::renormalize(h.prior);
  h.trans = rec.transition;
  for (auto& row : h.trans) detail::renormalize(row);
  h.states = rec.states;
  for (auto& st : h.states) st.cov = detail::floor_eigenvalues(st.cov, kCovEigFloor);
  return h;
}

namespace detail {

/// Permutes states so that the supplied occupancy is descending; permutes
/// the occupancy vector to match.
inline void reorder_by_occupancy(GaussianHmm& m, std::vector<double>& occupancy) {
  const std::size_t k_n = m.n_states();
  std::vector<std::size_t> order(k_n);
  for (std::size_t i = 0; i < k_n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return occupancy[a] > occupancy[b]; });
  GaussianHmm out;
  out.prior.resize(k_n);
  out.trans.assign(k_n, std::vector<double>(k_n));
  out.states.resize(k_n);
  std::vector<double> occ(k_n);
  for (std::size_t i = 0; i < k_n; ++i) {
    out.prior[i] = m.prior[order[i]];
    out.states[i] = m.states[order[i]];
    occ[i] = occupancy[order[i]];
    for (std::size_t j = 0; j < k_n; ++j) out.trans[i][j] = m.trans[order[i]][order[j]];
  }
  m = std::move(out);
  occupancy = std::move(occ);
}

}  // namespace detail

inline ModelRecord to_record(const GaussianHmm& h, std::optional<std::string> label = {},
                             std::vector<std::string> roi_names = {}) {
  ModelRecord rec;
  rec.n_states = h.n_states();
  rec.dim = 2;
  rec.prior = h.prior;
  rec.transition = h.trans;
  rec.states = h.states;
  rec.label = std::move(label);
  rec.roi_names = std::move(roi_names);
  return rec;
}

}  // namespace gazehmm
