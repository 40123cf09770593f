#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazehmm/model.hpp"

namespace gazehmm {

/// Five compiled-in representative models: one per experimental condition
/// plus the population-wide "general" model. Priors and transition rows are
/// stored verbatim as printed (4 decimals, including exact zeros and rows
/// summing to 0.9999); renormalization is deferred to to_hmm().
///
/// Emission parameters are only partially published: the two truth-condition
/// mean sets are known coordinates, everything else is a fixture. Models
/// whose means are fabricated carry meta synthetic_emission=true, and every
/// covariance is the isotropic prior 14^2 I (synthetic_covariance=true).
inline std::map<std::string, ModelRecord> load_bundled_models() {
  const Mat2 prior_cov = Mat2::isotropic(14.0 * 14.0);
  const std::vector<std::string> rois = {"red", "green", "black"};

  auto make = [&](std::vector<double> prior, std::vector<std::vector<double>> trans,
                  std::vector<Vec2> means, std::optional<std::string> label,
                  bool synthetic_means) {
    ModelRecord m;
    m.n_states = 3;
    m.dim = 2;
    m.prior = std::move(prior);
    m.transition = std::move(trans);
    for (const Vec2& mu : means) m.states.push_back({mu, prior_cov});
    m.label = std::move(label);
    m.roi_names = rois;
    m.meta_json = std::string("{\"synthetic_emission\":") +
                  (synthetic_means ? "true" : "false") + ",\"synthetic_covariance\":true}";
    return m;
  };

  std::map<std::string, ModelRecord> out;
  out.emplace("general",
              make({0.0000, 0.8475, 0.1525},
                   {{0.9704, 0.0086, 0.0210},
                    {0.0449, 0.9248, 0.0303},
                    {0.0411, 0.0248, 0.9340}},
                   {{678.0, 462.0}, {706.0, 336.0}, {632.0, 340.0}}, std::nullopt, true));
  out.emplace("truth_familiar",
              make({0.8626, 0.0479, 0.0895},
                   {{0.8859, 0.0402, 0.0738},
                    {0.0285, 0.9444, 0.0272},
                    {0.0903, 0.0252, 0.8845}},
                   {{634.9725, 351.6586}, {676.1114, 493.2836}, {706.2081, 332.5524}},
                   "truth_familiar", false));
  out.emplace("truth_unfamiliar",
              make({0.0820, 0.3354, 0.5826},
                   {{0.9680, 0.0215, 0.0105},
                    {0.0518, 0.9225, 0.0257},
                    {0.0420, 0.0898, 0.8682}},
                   {{672.2400, 430.2586}, {616.2596, 321.0105}, {688.8656, 337.2602}},
                   "truth_unfamiliar", false));
  out.emplace("lie_familiar",
              make({0.6456, 0.0000, 0.3544},
                   {{0.9102, 0.0500, 0.0398},
                    {0.0119, 0.9663, 0.0218},
                    {0.0305, 0.0501, 0.9194}},
                   {{695.0, 385.0}, {684.0, 450.0}, {677.0, 320.0}}, "lie_familiar", true));
  out.emplace("lie_unfamiliar",
              make({0.4848, 0.4027, 0.1125},
                   {{0.5602, 0.3775, 0.0623},
                    {0.3153, 0.5622, 0.1225},
                    {0.2099, 0.2751, 0.5150}},
                   {{708.0, 338.0}, {683.0, 245.0}, {630.0, 330.0}}, "lie_unfamiliar", true));
  return out;
}

inline ModelRecord bundled_model(const std::string& name) {
  auto all = load_bundled_models();
  auto it = all.find(name);
  if (it == all.end()) throw std::runtime_error("unknown bundled model: " + name);
  return it->second;
}

/// Screen frame the bundled coordinates live in; the stimulus face is
/// centered on a 1366x768 display.
inline constexpr double kDefaultScreenWidth = 1366.0;
inline constexpr double kDefaultScreenHeight = 768.0;
inline constexpr Vec2 kDefaultFaceCenter{683.0, 384.0};

}  // namespace gazehmm
