#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gazehmm/gaze_csv.hpp"
#include "gazehmm/types.hpp"

namespace gazehmm {

/// Dispersion-threshold identification parameters. The 5 px tolerance is the
/// conventional default for this stimulus geometry; the duration floor keeps
/// drifting sub-fixation windows out.
struct IdtConfig {
  double dispersion_px = 5.0;
  double min_duration_ms = 100.0;
};

/// Sum-of-ranges dispersion: (max x - min x) + (max y - min y).
inline double dispersion(std::span<const GazeSample> window) {
  if (window.empty()) throw std::invalid_argument("dispersion: empty window");
  double min_x = window[0].x_px, max_x = window[0].x_px;
  double min_y = window[0].y_px, max_y = window[0].y_px;
  for (const GazeSample& s : window) {
    min_x = std::min(min_x, s.x_px);
    max_x = std::max(max_x, s.x_px);
    min_y = std::min(min_y, s.y_px);
    max_y = std::max(max_y, s.y_px);
  }
  return (max_x - min_x) + (max_y - min_y);
}

/// I-DT sweep. A window is seeded to cover min_duration_ms; if its dispersion
/// is within threshold it greedily absorbs samples while the dispersion stays
/// within threshold and is emitted as one fixation, with the scan resuming
/// after it. Otherwise the window start advances one sample. Trailing samples
/// that cannot cover the duration produce nothing.
inline std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples,
                                              const IdtConfig& config = {}) {
  if (config.dispersion_px <= 0.0 || config.min_duration_ms <= 0.0) {
    throw std::invalid_argument("detect_fixations: config values must be positive");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t_ms > samples[i - 1].t_ms)) {
      throw ValidationError("detect_fixations: samples not strictly increasing in t_ms");
    }
  }

  std::vector<Fixation> out;
  std::size_t start = 0;
  while (start < samples.size()) {
    // Smallest window [start, end] spanning the duration floor.
    std::size_t end = start;
    while (end < samples.size() && samples[end].t_ms - samples[start].t_ms < config.min_duration_ms) {
      ++end;
    }
    if (end == samples.size()) break;  // trailing samples too short

    if (dispersion(samples.subspan(start, end - start + 1)) > config.dispersion_px) {
      ++start;
      continue;
    }
    while (end + 1 < samples.size() &&
           dispersion(samples.subspan(start, end - start + 2)) <= config.dispersion_px) {
      ++end;
    }
    Fixation f;
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

struct FixationStats {
  double mean_duration_ms = 0.0;
  double sd_duration_ms = 0.0;  // population form (N divisor)
  double mean_count_per_trial = 0.0;
  std::size_t n_fixations = 0;
  std::size_t n_trials = 0;
};

/// Population statistics over per-trial fixation lists.
inline FixationStats fixation_stats(const std::vector<std::vector<Fixation>>& trials) {
  FixationStats st;
  st.n_trials = trials.size();
  double sum = 0.0;
  for (const auto& t : trials) {
    st.n_fixations += t.size();
    for (const Fixation& f : t) sum += f.duration_ms;
  }
  if (st.n_fixations == 0) throw std::runtime_error("fixation_stats: no fixations");
  const double n = static_cast<double>(st.n_fixations);
  st.mean_duration_ms = sum / n;
  double ss = 0.0;
  for (const auto& t : trials) {
    for (const Fixation& f : t) {
      const double d = f.duration_ms - st.mean_duration_ms;
      ss += d * d;
    }
  }
  st.sd_duration_ms = std::sqrt(ss / n);
  st.mean_count_per_trial = n / static_cast<double>(st.n_trials);
  return st;
}

}  // namespace gazehmm
