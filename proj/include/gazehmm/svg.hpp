#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gazehmm/gaze_csv.hpp"
#include "gazehmm/model.hpp"
#include "gazehmm/model_json.hpp"
#include "gazehmm/types.hpp"

namespace gazehmm {

namespace detail {

inline std::string svg_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline const char* roi_color(std::size_t k) {
  static const char* palette[] = {"#c0392b", "#27ae60", "#2c3e50", "#8e44ad", "#d35400", "#16a085"};
  return palette[k % 6];
}

inline void svg_open(std::ostringstream& os, const Manifest& man, const std::string& meta_comment) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(man.screen_width_px)
     << "\" height=\"" << svg_num(man.screen_height_px) << "\" viewBox=\"0 0 "
     << svg_num(man.screen_width_px) << ' ' << svg_num(man.screen_height_px) << "\">\n";
  if (!meta_comment.empty()) os << "<!-- " << meta_comment << " -->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace detail

/// One black dot per fixation; each trial's centroids are joined by a blue
/// polyline in time order.
inline std::string render_scanpath_svg(const std::vector<std::vector<Fixation>>& trials,
                                       const Manifest& man, const std::string& meta_comment = "") {
  std::ostringstream os;
  detail::svg_open(os, man, meta_comment);
  for (const auto& fixations : trials) {
    if (fixations.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"#2980b9\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < fixations.size(); ++i) {
        if (i) os << ' ';
        os << detail::svg_num(fixations[i].x_px) << ',' << detail::svg_num(fixations[i].y_px);
      }
      os << "\"/>\n";
    }
  }
  for (const auto& fixations : trials) {
    for (const Fixation& f : fixations) {
      // radius hints at duration, 3..12 px
      const double r = std::min(12.0, 3.0 + f.duration_ms / 100.0);
      os << "<circle cx=\"" << detail::svg_num(f.x_px) << "\" cy=\"" << detail::svg_num(f.y_px)
         << "\" r=\"" << detail::svg_num(r) << "\" fill=\"black\" fill-opacity=\"0.75\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string render_scanpath_svg(const std::vector<Fixation>& fixations, const Manifest& man,
                                       const std::string& meta_comment = "") {
  return render_scanpath_svg(std::vector<std::vector<Fixation>>{fixations}, man, meta_comment);
}

/// One ellipse per state at the 2-standard-deviation contour plus its mean
/// point; axes come from the covariance eigendecomposition.
inline std::string render_model_svg(const ModelRecord& rec, const Manifest& man,
                                    const std::string& meta_comment = "") {
  std::ostringstream os;
  detail::svg_open(os, man, meta_comment);
  for (std::size_t k = 0; k < rec.states.size(); ++k) {
    const auto& st = rec.states[k];
    const SymEig e = sym_eigen(st.cov);
    const double rx = 2.0 * std::sqrt(std::max(0.0, e.hi));
    const double ry = 2.0 * std::sqrt(std::max(0.0, e.lo));
    const double angle = std::atan2(e.hi_axis.y, e.hi_axis.x) * 180.0 / M_PI;
    const char* color = detail::roi_color(k);
    os << "<ellipse cx=\"" << detail::svg_num(st.mean.x) << "\" cy=\"" << detail::svg_num(st.mean.y)
       << "\" rx=\"" << detail::svg_num(rx) << "\" ry=\"" << detail::svg_num(ry)
       << "\" transform=\"rotate(" << detail::svg_num(angle) << ' ' << detail::svg_num(st.mean.x)
       << ' ' << detail::svg_num(st.mean.y) << ")\" fill=\"" << color
       << "\" fill-opacity=\"0.25\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    os << "<circle cx=\"" << detail::svg_num(st.mean.x) << "\" cy=\"" << detail::svg_num(st.mean.y)
       << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const std::string name = k < rec.roi_names.size() ? rec.roi_names[k] : "s" + std::to_string(k);
    os << "<text x=\"" << detail::svg_num(st.mean.x + rx + 4.0) << "\" y=\""
       << detail::svg_num(st.mean.y) << "\" font-size=\"12\" fill=\"" << color << "\">" << name
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gazehmm
