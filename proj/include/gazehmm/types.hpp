#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gazehmm/geometry.hpp"

namespace gazehmm {

/// One raw eye-tracker sample: milliseconds since trial start plus screen
/// coordinates in pixels.
struct GazeSample {
  double t_ms = 0.0;
  double x_px = 0.0;
  double y_px = 0.0;
};

enum class Condition {
  truth_familiar,
  truth_unfamiliar,
  lie_familiar,
  lie_unfamiliar,
  unknown,
};

inline constexpr const char* to_string(Condition c) {
  switch (c) {
    case Condition::truth_familiar: return "truth_familiar";
    case Condition::truth_unfamiliar: return "truth_unfamiliar";
    case Condition::lie_familiar: return "lie_familiar";
    case Condition::lie_unfamiliar: return "lie_unfamiliar";
    case Condition::unknown: return "unknown";
  }
  return "unknown";
}

/// Unrecognized strings map to unknown rather than erroring.
inline Condition condition_from_string(std::string_view s) {
  if (s == "truth_familiar") return Condition::truth_familiar;
  if (s == "truth_unfamiliar") return Condition::truth_unfamiliar;
  if (s == "lie_familiar") return Condition::lie_familiar;
  if (s == "lie_unfamiliar") return Condition::lie_unfamiliar;
  return Condition::unknown;
}

/// All samples of one stimulus viewing, strictly increasing in t_ms.
struct Trial {
  std::string participant_id;
  std::string trial_id;
  Condition condition = Condition::unknown;
  std::vector<GazeSample> samples;
};

/// One fixation produced by dispersion-threshold identification.
struct Fixation {
  double x_px = 0.0;
  double y_px = 0.0;
  double start_ms = 0.0;
  double duration_ms = 0.0;
  std::size_t n_samples = 0;
};

/// Fixation centroids of one trial, in time order; the unit the HMM layer
/// consumes.
using ObservationSequence = std::vector<Vec2>;

}  // namespace gazehmm
