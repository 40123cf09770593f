#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gazehmm/hmm.hpp"
#include "gazehmm/model.hpp"

namespace gazehmm {

/// Horizon of the canonical reference path a model is compared against.
inline constexpr std::size_t kReferenceLen = 19;

struct ClassificationReport {
  std::string rule;
  std::map<std::string, double> scores;
  std::string chosen;
};

/// Canonical state path of a model alone: take the most probable state at
/// each step of the bare chain, emit the state means along it, and Viterbi-
/// decode that virtual sequence under the model.
inline std::vector<std::size_t> reference_path(const GaussianHmm& m,
                                               std::size_t len = kReferenceLen) {
  if (len == 0) throw std::invalid_argument("reference_path: length must be positive");
  const std::size_t k_n = m.n_states();
  const auto marg = chain_marginals(m, len);
  ObservationSequence virtual_obs;
  virtual_obs.reserve(len);
  for (std::size_t t = 0; t < len; ++t) {
    std::size_t arg = 0;
    for (std::size_t k = 1; k < k_n; ++k) {
      if (marg[t * k_n + k] > marg[t * k_n + arg]) arg = k;
    }
    virtual_obs.push_back(m.states[arg].mean);
  }
  return viterbi(m, virtual_obs).path;
}

/// Fraction of positions (over the common prefix) where the Viterbi decode
/// of seq under the model matches the reference path.
inline double viterbi_agreement(const ObservationSequence& seq, const GaussianHmm& m,
                                const std::vector<std::size_t>& ref) {
  if (ref.empty()) throw std::invalid_argument("viterbi_agreement: empty reference path");
  const auto decoded = viterbi(m, seq).path;
  const std::size_t n = std::min(decoded.size(), ref.size());
  std::size_t hits = 0;
  for (std::size_t t = 0; t < n; ++t) hits += decoded[t] == ref[t] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(n);
}

using CandidateMap = std::map<std::string, GaussianHmm>;

namespace detail {

inline std::string argbest(const std::map<std::string, double>& scores, bool maximize) {
  std::string best_label;
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  // map iteration is lexicographic, so a strict comparison keeps the
  // smallest label on ties
  for (const auto& [label, s] : scores) {
    if ((maximize && s > best) || (!maximize && s < best)) {
      best = s;
      best_label = label;
    }
  }
  return best_label;
}

}  // namespace detail

/// Highest marginal likelihood wins; ties go to the lexicographically
/// smallest label.
inline ClassificationReport classify_loglik(const ObservationSequence& seq,
                                            const CandidateMap& candidates) {
  if (candidates.empty()) throw std::invalid_argument("classify: no candidates");
  ClassificationReport rep;
  rep.rule = "loglik";
  bool any_finite = false;
  for (const auto& [label, model] : candidates) {
    const double s = log_likelihood(model, seq);
    any_finite = any_finite || s != kNegInf;
    rep.scores[label] = s;
  }
  if (!any_finite) throw std::runtime_error("classify: sequence inadmissible under all candidates");
  rep.chosen = detail::argbest(rep.scores, true);
  return rep;
}

/// Highest Viterbi-path agreement against each candidate's reference path.
inline ClassificationReport classify_agreement(const ObservationSequence& seq,
                                               const CandidateMap& candidates,
                                               std::size_t ref_len = kReferenceLen) {
  if (candidates.empty()) throw std::invalid_argument("classify: no candidates");
  ClassificationReport rep;
  rep.rule = "agreement";
  for (const auto& [label, model] : candidates) {
    rep.scores[label] = viterbi_agreement(seq, model, reference_path(model, ref_len));
  }
  rep.chosen = detail::argbest(rep.scores, true);
  return rep;
}

/// Euclidean distance between two polylines over their common prefix.
inline double polyline_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) throw std::invalid_argument("polyline_distance: empty polyline");
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const Vec2 d = a[t] - b[t];
    acc += dot(d, d);
  }
  return std::sqrt(acc);
}

inline std::vector<Vec2> path_to_polyline(const GaussianHmm& m,
                                          const std::vector<std::size_t>& path) {
  std::vector<Vec2> out;
  out.reserve(path.size());
  for (std::size_t s : path) out.push_back(m.states[s].mean);
  return out;
}

/// Smallest distance between the sequence's decoded polyline and the
/// candidate's reference polyline, both in the candidate's ROI-mean
/// coordinates.
inline ClassificationReport classify_path_distance(const ObservationSequence& seq,
                                                   const CandidateMap& candidates,
                                                   std::size_t ref_len = kReferenceLen) {
  if (candidates.empty()) throw std::invalid_argument("classify: no candidates");
  ClassificationReport rep;
  rep.rule = "path-distance";
  for (const auto& [label, model] : candidates) {
    const auto decoded = viterbi(model, seq).path;
    const auto ref = reference_path(model, ref_len);
    rep.scores[label] =
        polyline_distance(path_to_polyline(model, decoded), path_to_polyline(model, ref));
  }
  rep.chosen = detail::argbest(rep.scores, false);
  return rep;
}

struct ConfusionMatrix {
  std::vector<std::string> labels;       // sorted; rows = truth, columns = prediction
  std::vector<std::vector<long>> counts;
  std::map<std::string, double> per_class_accuracy;
  double overall_accuracy = 0.0;
};

inline ConfusionMatrix confusion(const std::vector<std::string>& predictions,
                                 const std::vector<std::string>& truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("confusion: predictions and truths differ in length");
  }
  if (predictions.empty()) throw std::invalid_argument("confusion: empty input");
  ConfusionMatrix cm;
  std::map<std::string, std::size_t> index;
  for (const auto& l : truths) index.emplace(l, 0);
  for (const auto& l : predictions) index.emplace(l, 0);
  for (auto& [label, idx] : index) {
    idx = cm.labels.size();
    cm.labels.push_back(label);
  }
  cm.counts.assign(cm.labels.size(), std::vector<long>(cm.labels.size(), 0));
  long correct = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    ++cm.counts[index[truths[i]]][index[predictions[i]]];
    if (truths[i] == predictions[i]) ++correct;
  }
  for (std::size_t r = 0; r < cm.labels.size(); ++r) {
    long row = 0;
    for (long c : cm.counts[r]) row += c;
    if (row > 0) {
      cm.per_class_accuracy[cm.labels[r]] =
          static_cast<double>(cm.counts[r][r]) / static_cast<double>(row);
    }
  }
  cm.overall_accuracy = static_cast<double>(correct) / static_cast<double>(truths.size());
  return cm;
}

/// Mean squared deviation of the centers about the face center, per axis.
inline std::pair<double, double> roi_spread(const std::vector<Vec2>& centers, Vec2 face_center) {
  if (centers.empty()) throw std::invalid_argument("roi_spread: no centers");
  double sx = 0.0, sy = 0.0;
  for (const Vec2& c : centers) {
    sx += (c.x - face_center.x) * (c.x - face_center.x);
    sy += (c.y - face_center.y) * (c.y - face_center.y);
  }
  const double n = static_cast<double>(centers.size());
  return {sx / n, sy / n};
}

}  // namespace gazehmm
