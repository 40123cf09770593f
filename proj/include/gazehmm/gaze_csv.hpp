#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gazehmm/types.hpp"

namespace gazehmm {

/// Malformed input (bad header, wrong arity, unparseable number).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Structurally parseable but semantically inadmissible data.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kGazeCsvHeader =
    "participant_id,trial_id,condition,t_ms,x_px,y_px";
inline constexpr std::string_view kFixationCsvHeader =
    "participant_id,trial_id,condition,start_ms,duration_ms,x_px,y_px,n_samples";

namespace detail {

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

inline std::vector<std::string_view> split_csv(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline double parse_number(std::string_view s, std::size_t line, const char* what) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw ParseError(line, std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line, std::string(what) + " is not finite");
  }
  return value;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

/// Parses the gaze CSV schema. Lines starting with '#' and blank lines are
/// ignored. Rows of one trial must be contiguous and strictly increasing in
/// t_ms; violations are reported, never repaired.
inline std::vector<Trial> parse_gaze_csv(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<Trial> trials;
  std::set<std::pair<std::string, std::string>> closed;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::strip_cr(raw);
    if (detail::is_blank(line) || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kGazeCsvHeader) {
        throw ParseError(line_no, "expected header '" + std::string(kGazeCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv(line);
    if (fields.size() != 6) {
      throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
    }
    GazeSample s;
    s.t_ms = detail::parse_number(fields[3], line_no, "t_ms");
    s.x_px = detail::parse_number(fields[4], line_no, "x_px");
    s.y_px = detail::parse_number(fields[5], line_no, "y_px");
    if (s.t_ms < 0.0) throw ParseError(line_no, "t_ms is negative");

    const std::string pid(fields[0]);
    const std::string tid(fields[1]);
    const bool continues = !trials.empty() && trials.back().participant_id == pid &&
                           trials.back().trial_id == tid;
    if (!continues) {
      if (closed.count({pid, tid})) {
        throw ValidationError("trial (" + pid + ", " + tid + ") has non-contiguous rows");
      }
      if (!trials.empty()) {
        closed.insert({trials.back().participant_id, trials.back().trial_id});
      }
      Trial t;
      t.participant_id = pid;
      t.trial_id = tid;
      t.condition = condition_from_string(fields[2]);
      trials.push_back(std::move(t));
    }
    Trial& t = trials.back();
    if (!t.samples.empty() && s.t_ms <= t.samples.back().t_ms) {
      throw ValidationError("trial (" + pid + ", " + tid +
                            ") has non-increasing t_ms at line " + std::to_string(line_no));
    }
    t.samples.push_back(s);
  }
  if (!header_seen && line_no > 0) {
    throw ParseError(1, "missing header");
  }
  return trials;
}

inline void write_gaze_csv(std::ostream& out, const std::vector<Trial>& trials) {
  out << kGazeCsvHeader << "\n";
  for (const Trial& t : trials) {
    for (const GazeSample& s : t.samples) {
      out << t.participant_id << ',' << t.trial_id << ',' << to_string(t.condition) << ','
          << detail::format_fixed(s.t_ms, 3) << ',' << detail::format_fixed(s.x_px, 4) << ','
          << detail::format_fixed(s.y_px, 4) << "\n";
    }
  }
}

struct FixationRow {
  std::string participant_id;
  std::string trial_id;
  Condition condition = Condition::unknown;
  Fixation fix;
};

inline void write_fixation_csv(std::ostream& out, const std::vector<FixationRow>& rows) {
  out << kFixationCsvHeader << "\n";
  for (const FixationRow& r : rows) {
    out << r.participant_id << ',' << r.trial_id << ',' << to_string(r.condition) << ','
        << detail::format_fixed(r.fix.start_ms, 3) << ','
        << detail::format_fixed(r.fix.duration_ms, 3) << ','
        << detail::format_fixed(r.fix.x_px, 4) << ',' << detail::format_fixed(r.fix.y_px, 4)
        << ',' << r.fix.n_samples << "\n";
  }
}

inline std::vector<FixationRow> parse_fixation_csv(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<FixationRow> rows;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::strip_cr(raw);
    if (detail::is_blank(line) || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kFixationCsvHeader) {
        throw ParseError(line_no, "expected header '" + std::string(kFixationCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv(line);
    if (fields.size() != 8) {
      throw ParseError(line_no, "expected 8 fields, got " + std::to_string(fields.size()));
    }
    FixationRow r;
    r.participant_id = std::string(fields[0]);
    r.trial_id = std::string(fields[1]);
    r.condition = condition_from_string(fields[2]);
    r.fix.start_ms = detail::parse_number(fields[3], line_no, "start_ms");
    r.fix.duration_ms = detail::parse_number(fields[4], line_no, "duration_ms");
    r.fix.x_px = detail::parse_number(fields[5], line_no, "x_px");
    r.fix.y_px = detail::parse_number(fields[6], line_no, "y_px");
    const double n = detail::parse_number(fields[7], line_no, "n_samples");
    if (n < 1.0 || n != std::floor(n)) throw ParseError(line_no, "n_samples must be a positive integer");
    r.fix.n_samples = static_cast<std::size_t>(n);
    if (r.fix.duration_ms <= 0.0) throw ParseError(line_no, "duration_ms must be positive");
    rows.push_back(std::move(r));
  }
  if (!header_seen && line_no > 0) throw ParseError(1, "missing header");
  return rows;
}

/// Fixations of one trial in time order, as consumed by training and
/// classification.
struct TrialSequence {
  std::string participant_id;
  std::string trial_id;
  Condition condition = Condition::unknown;
  ObservationSequence points;
};

inline std::vector<TrialSequence> group_fixation_rows(const std::vector<FixationRow>& rows) {
  std::vector<TrialSequence> out;
  std::set<std::pair<std::string, std::string>> closed;
  double last_start = 0.0;
  for (const FixationRow& r : rows) {
    const bool continues = !out.empty() && out.back().participant_id == r.participant_id &&
                           out.back().trial_id == r.trial_id;
    if (!continues) {
      if (closed.count({r.participant_id, r.trial_id})) {
        throw ValidationError("trial (" + r.participant_id + ", " + r.trial_id +
                              ") has non-contiguous rows");
      }
      if (!out.empty()) closed.insert({out.back().participant_id, out.back().trial_id});
      out.push_back({r.participant_id, r.trial_id, r.condition, {}});
    } else if (r.fix.start_ms <= last_start) {
      throw ValidationError("trial (" + r.participant_id + ", " + r.trial_id +
                            ") has non-increasing start_ms");
    }
    out.back().points.push_back({r.fix.x_px, r.fix.y_px});
    last_start = r.fix.start_ms;
  }
  return out;
}

}  // namespace gazehmm
