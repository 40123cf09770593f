#pragma once

#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazehmm/bundled.hpp"
#include "gazehmm/model.hpp"

namespace gazehmm {

namespace detail {

/// 10 significant digits; parse/print is idempotent, so a file written here
/// re-serializes byte-identically.
inline std::string format_sig10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

inline void emit_vector(std::ostream& os, const std::vector<double>& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << format_sig10(v[i]);
  }
  os << ']';
}

inline void emit_mat2(std::ostream& os, const Mat2& m) {
  os << "[[" << format_sig10(m.a) << ", " << format_sig10(m.b) << "], ["
     << format_sig10(m.c) << ", " << format_sig10(m.d) << "]]";
}

inline double expect_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw std::runtime_error(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw std::runtime_error(where + ": value not finite");
  return v;
}

inline std::vector<double> expect_vector(const nlohmann::json& j, std::size_t n,
                                         const std::string& where) {
  if (!j.is_array() || j.size() != n) {
    throw std::runtime_error(where + ": expected an array of length " + std::to_string(n));
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(expect_number(j[i], where));
  return out;
}

}  // namespace detail

inline std::string write_model(const ModelRecord& m) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"n_states\": " << m.n_states << ",\n";
  os << "  \"dim\": " << m.dim << ",\n";
  os << "  \"prior\": ";
  detail::emit_vector(os, m.prior);
  os << ",\n  \"transition\": [";
  for (std::size_t j = 0; j < m.transition.size(); ++j) {
    if (j) os << ", ";
    detail::emit_vector(os, m.transition[j]);
  }
  os << "],\n  \"states\": [\n";
  for (std::size_t k = 0; k < m.states.size(); ++k) {
    os << "    {\"mean\": [" << detail::format_sig10(m.states[k].mean.x) << ", "
       << detail::format_sig10(m.states[k].mean.y) << "], \"cov\": ";
    detail::emit_mat2(os, m.states[k].cov);
    os << '}' << (k + 1 < m.states.size() ? "," : "") << "\n";
  }
  os << "  ]";
  if (m.label) os << ",\n  \"label\": " << detail::json_string(*m.label);
  if (!m.roi_names.empty()) {
    os << ",\n  \"roi_names\": [";
    for (std::size_t i = 0; i < m.roi_names.size(); ++i) {
      if (i) os << ", ";
      os << detail::json_string(m.roi_names[i]);
    }
    os << ']';
  }
  if (!m.meta_json.empty()) {
    os << ",\n  \"meta\": " << nlohmann::json::parse(m.meta_json).dump();
  }
  os << "\n}\n";
  return os.str();
}

/// Structural parse only; numeric invariants are left to validate_model.
/// Unknown fields, missing fields and dimension mismatches raise with a
/// description of what is wrong.
inline ModelRecord read_model_unchecked(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("model: expected a JSON object");
  static const std::vector<std::string> known = {"n_states", "dim",       "prior", "transition",
                                                 "states",   "label",     "roi_names", "meta"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || it.key() == k;
    if (!ok) throw std::runtime_error("model: unknown field '" + it.key() + "'");
  }
  for (const char* req : {"n_states", "dim", "prior", "transition", "states"}) {
    if (!j.contains(req)) throw std::runtime_error(std::string("model: missing field '") + req + "'");
  }
  ModelRecord m;
  if (!j["n_states"].is_number_unsigned() || j["n_states"].get<std::size_t>() == 0) {
    throw std::runtime_error("model: n_states must be a positive integer");
  }
  m.n_states = j["n_states"].get<std::size_t>();
  if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() != 2) {
    throw std::runtime_error("model: dim must be 2");
  }
  m.dim = 2;
  m.prior = detail::expect_vector(j["prior"], m.n_states, "prior");
  if (!j["transition"].is_array() || j["transition"].size() != m.n_states) {
    throw std::runtime_error("model: transition must have n_states rows");
  }
  for (std::size_t r = 0; r < m.n_states; ++r) {
    m.transition.push_back(
        detail::expect_vector(j["transition"][r], m.n_states, "transition[" + std::to_string(r) + "]"));
  }
  if (!j["states"].is_array() || j["states"].size() != m.n_states) {
    throw std::runtime_error("model: states must have n_states entries");
  }
  for (std::size_t k = 0; k < m.n_states; ++k) {
    const auto& js = j["states"][k];
    const std::string where = "states[" + std::to_string(k) + "]";
    if (!js.is_object() || !js.contains("mean") || !js.contains("cov")) {
      throw std::runtime_error(where + ": expected {mean, cov}");
    }
    for (auto it = js.begin(); it != js.end(); ++it) {
      if (it.key() != "mean" && it.key() != "cov") {
        throw std::runtime_error(where + ": unknown field '" + it.key() + "'");
      }
    }
    const auto mean = detail::expect_vector(js["mean"], 2, where + ".mean");
    if (!js["cov"].is_array() || js["cov"].size() != 2) {
      throw std::runtime_error(where + ".cov: expected a 2x2 matrix");
    }
    const auto r0 = detail::expect_vector(js["cov"][0], 2, where + ".cov[0]");
    const auto r1 = detail::expect_vector(js["cov"][1], 2, where + ".cov[1]");
    m.states.push_back({{mean[0], mean[1]}, {r0[0], r0[1], r1[0], r1[1]}});
  }
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw std::runtime_error("model: label must be a string");
    m.label = j["label"].get<std::string>();
  }
  if (j.contains("roi_names")) {
    if (!j["roi_names"].is_array()) throw std::runtime_error("model: roi_names must be an array");
    for (const auto& n : j["roi_names"]) {
      if (!n.is_string()) throw std::runtime_error("model: roi_names entries must be strings");
      m.roi_names.push_back(n.get<std::string>());
    }
  }
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw std::runtime_error("model: meta must be an object");
    m.meta_json = j["meta"].dump();
  }
  return m;
}

/// Parse plus full invariant validation.
inline ModelRecord read_model(const nlohmann::json& j) {
  ModelRecord m = read_model_unchecked(j);
  const auto violations = validate_model(m);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "model: invariant violations:";
    for (const auto& v : violations) os << "\n  " << to_string(v);
    throw std::runtime_error(os.str());
  }
  return m;
}

inline ModelRecord read_model(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model: JSON parse failure: ") + e.what());
  }
  return read_model(j);
}

inline ModelRecord read_model_string(const std::string& s) {
  std::istringstream is(s);
  return read_model(is);
}

/// Reduced-mixture file contents: a JSON array of models plus weights and
/// the soft assignment matrix.
struct MixtureRecord {
  std::vector<ModelRecord> models;
  std::vector<double> weights;
  std::vector<std::vector<double>> assignments;  // base model -> cluster responsibilities
  double elbo = 0.0;
  std::string meta_json;
};

inline std::string write_mixture(const MixtureRecord& mix) {
  std::ostringstream os;
  os << "{\n  \"weights\": ";
  detail::emit_vector(os, mix.weights);
  os << ",\n  \"elbo\": " << detail::format_sig10(mix.elbo);
  os << ",\n  \"models\": [\n";
  for (std::size_t i = 0; i < mix.models.size(); ++i) {
    std::istringstream body(write_model(mix.models[i]));
    std::string line;
    bool first = true;
    while (std::getline(body, line)) {
      os << (first ? "" : "\n") << "    " << line;
      first = false;
    }
    os << (i + 1 < mix.models.size() ? ",\n" : "\n");
  }
  os << "  ],\n  \"assignments\": [";
  for (std::size_t i = 0; i < mix.assignments.size(); ++i) {
    if (i) os << ", ";
    detail::emit_vector(os, mix.assignments[i]);
  }
  os << ']';
  if (!mix.meta_json.empty()) os << ",\n  \"meta\": " << nlohmann::json::parse(mix.meta_json).dump();
  os << "\n}\n";
  return os.str();
}

inline MixtureRecord read_mixture(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("mixture: JSON parse failure: ") + e.what());
  }
  MixtureRecord mix;
  if (!j.is_object() || !j.contains("models") || !j.contains("weights")) {
    throw std::runtime_error("mixture: expected {weights, models, assignments, elbo}");
  }
  for (const auto& w : j["weights"]) mix.weights.push_back(detail::expect_number(w, "weights"));
  for (const auto& jm : j["models"]) mix.models.push_back(read_model(jm));
  if (j.contains("assignments")) {
    for (const auto& row : j["assignments"]) {
      mix.assignments.push_back(detail::expect_vector(row, mix.weights.size(), "assignments"));
    }
  }
  if (j.contains("elbo")) mix.elbo = detail::expect_number(j["elbo"], "elbo");
  if (j.contains("meta")) mix.meta_json = j["meta"].dump();
  return mix;
}

/// Dataset manifest: screen frame, face center and the trials CSV path.
struct Manifest {
  double screen_width_px = kDefaultScreenWidth;
  double screen_height_px = kDefaultScreenHeight;
  Vec2 face_center = kDefaultFaceCenter;
  std::string trials_csv;
};

inline Manifest read_manifest(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("manifest: JSON parse failure: ") + e.what());
  }
  Manifest m;
  if (j.contains("screen")) {
    m.screen_width_px = detail::expect_number(j["screen"].at("width_px"), "screen.width_px");
    m.screen_height_px = detail::expect_number(j["screen"].at("height_px"), "screen.height_px");
  }
  if (j.contains("face_center")) {
    const auto fc = detail::expect_vector(j["face_center"], 2, "face_center");
    m.face_center = {fc[0], fc[1]};
  }
  if (j.contains("trials_csv")) m.trials_csv = j["trials_csv"].get<std::string>();
  return m;
}

inline std::string write_manifest(const Manifest& m) {
  std::ostringstream os;
  os << "{\n  \"screen\": {\"width_px\": " << detail::format_sig10(m.screen_width_px)
     << ", \"height_px\": " << detail::format_sig10(m.screen_height_px) << "},\n"
     << "  \"face_center\": [" << detail::format_sig10(m.face_center.x) << ", "
     << detail::format_sig10(m.face_center.y) << "],\n"
     << "  \"trials_csv\": " << detail::json_string(m.trials_csv) << "\n}\n";
  return os.str();
}

}  // namespace gazehmm
