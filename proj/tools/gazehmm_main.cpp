// Command-line front end: fixation detection, HMM training, VHEM reduction,
// classification, simulation, validation and SVG plots over the documented
// CSV/JSON formats.
//
// Exit codes: 0 success, 2 data/validation error, 64 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gazehmm/bundled.hpp"
#include "gazehmm/classify.hpp"
#include "gazehmm/fixation.hpp"
#include "gazehmm/gaze_csv.hpp"
#include "gazehmm/hmm.hpp"
#include "gazehmm/model.hpp"
#include "gazehmm/model_json.hpp"
#include "gazehmm/svg.hpp"
#include "gazehmm/train.hpp"
#include "gazehmm/version.hpp"
#include "gazehmm/vhem.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitUsage = 64;

json run_meta(const std::string& command, std::uint64_t seed) {
  return json{{"tool_version", gazehmm::kToolVersion}, {"seed", seed}, {"command", command}};
}

void write_text_file(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

gazehmm::ModelRecord load_model_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  try {
    return gazehmm::read_model(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::vector<gazehmm::TrialSequence> load_sequences(const fs::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + csv.string());
  return gazehmm::group_fixation_rows(gazehmm::parse_fixation_csv(in));
}

std::string csv_meta_line(const std::string& command, std::uint64_t seed) {
  return "# meta: " + run_meta(command, seed).dump() + "\n";
}

// ---------------------------------------------------------------------------

int cmd_fixations(const fs::path& input, const fs::path& out_csv, const fs::path& stats_json,
                  const gazehmm::IdtConfig& cfg, std::uint64_t seed) {
  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open: " << input << "\n";
    return kExitData;
  }
  const auto trials = gazehmm::parse_gaze_csv(in);

  std::vector<gazehmm::FixationRow> rows;
  std::vector<std::vector<gazehmm::Fixation>> per_trial;
  for (const auto& t : trials) {
    auto fx = gazehmm::detect_fixations(t.samples, cfg);
    for (const auto& f : fx) rows.push_back({t.participant_id, t.trial_id, t.condition, f});
    per_trial.push_back(std::move(fx));
  }
  std::ostringstream body;
  gazehmm::write_fixation_csv(body, rows);
  body << csv_meta_line("fixations", seed);
  write_text_file(out_csv, body.str());

  if (!stats_json.empty()) {
    json st;
    if (!rows.empty()) {
      const auto s = gazehmm::fixation_stats(per_trial);
      st = json{{"mean_duration_ms", s.mean_duration_ms},
                {"sd_duration_ms", s.sd_duration_ms},
                {"mean_count_per_trial", s.mean_count_per_trial},
                {"n_fixations", s.n_fixations},
                {"n_trials", s.n_trials}};
    } else {
      st = json{{"n_fixations", 0}, {"n_trials", trials.size()}};
    }
    st["meta"] = run_meta("fixations", seed);
    write_text_file(stats_json, st.dump(2) + "\n");
  }
  std::cerr << "fixations: " << rows.size() << " fixations from " << trials.size() << " trials\n";
  return kExitOk;
}

int cmd_train(const fs::path& input, const fs::path& out_dir, const std::string& group_by,
              const gazehmm::TrainConfig& cfg) {
  const auto seqs = load_sequences(input);
  const bool by_participant = group_by.find("participant") != std::string::npos;
  const bool by_condition = group_by.find("condition") != std::string::npos;

  struct Group {
    std::vector<gazehmm::ObservationSequence> seqs;
    std::optional<std::string> condition;
  };
  std::map<std::string, Group> groups;
  for (const auto& s : seqs) {
    std::string key;
    if (by_participant) key += s.participant_id;
    if (by_condition) key += (key.empty() ? "" : "_") + std::string(to_string(s.condition));
    if (key.empty()) key = "all";
    auto& g = groups[key];
    g.seqs.push_back(s.points);
    if (by_condition) g.condition = to_string(s.condition);
  }

  std::size_t trained = 0;
  for (const auto& [key, group] : groups) {
    std::size_t total_obs = 0;
    for (const auto& s : group.seqs) total_obs += s.size();
    if (total_obs < cfg.n_states) {
      std::cerr << "warning: group '" << key << "' has " << total_obs
                << " observations, fewer than " << cfg.n_states << " states; skipped\n";
      continue;
    }
    const auto fit = gazehmm::fit_map(group.seqs, cfg);
    gazehmm::ModelRecord rec = gazehmm::to_record(fit.model, group.condition);
    json meta = run_meta("train", cfg.seed);
    meta["group"] = key;
    meta["n_sequences"] = group.seqs.size();
    meta["objective"] = fit.objective;
    meta["objective_trace"] = fit.trace;
    rec.meta_json = meta.dump();
    write_text_file(out_dir / (key + ".model.json"), gazehmm::write_model(rec));
    ++trained;
  }
  std::cerr << "train: wrote " << trained << " of " << groups.size() << " groups\n";
  if (trained == 0) {
    std::cerr << "error: every group was skipped\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_reduce(const std::vector<fs::path>& model_files, const fs::path& out_json,
               const fs::path& assignments_csv, const gazehmm::VhemConfig& cfg) {
  std::vector<gazehmm::GaussianHmm> bases;
  std::vector<std::optional<std::string>> labels;
  for (const auto& f : model_files) {
    const auto rec = load_model_file(f);
    bases.push_back(gazehmm::to_hmm(rec));
    labels.push_back(rec.label);
  }
  const auto mix = gazehmm::reduce(bases, cfg);
  const auto hard = gazehmm::hard_assignments(mix);

  gazehmm::MixtureRecord out;
  out.weights = mix.weights;
  out.assignments = mix.assignments;
  out.elbo = mix.elbo;
  for (std::size_t j = 0; j < mix.models.size(); ++j) {
    gazehmm::ModelRecord rec = gazehmm::to_record(mix.models[j]);
    json meta = run_meta("reduce", cfg.seed);
    meta["cluster"] = j;
    rec.meta_json = meta.dump();
    out.models.push_back(std::move(rec));
  }
  out.meta_json = run_meta("reduce", cfg.seed).dump();
  write_text_file(out_json, gazehmm::write_mixture(out));

  if (!assignments_csv.empty()) {
    std::ostringstream os;
    os << "base_index,source,label,cluster";
    for (std::size_t j = 0; j < mix.weights.size(); ++j) os << ",resp_" << j;
    os << "\n";
    for (std::size_t i = 0; i < model_files.size(); ++i) {
      os << i << ',' << model_files[i].filename().string() << ','
         << (labels[i] ? *labels[i] : "") << ',' << hard[i];
      for (double r : mix.assignments[i]) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", r);
        os << ',' << buf;
      }
      os << "\n";
    }
    os << csv_meta_line("reduce", cfg.seed);
    write_text_file(assignments_csv, os.str());
  }
  std::cerr << "reduce: " << bases.size() << " models -> " << mix.models.size()
            << " clusters, elbo " << mix.elbo << "\n";
  return kExitOk;
}

int cmd_classify(const fs::path& input, const std::vector<fs::path>& model_files,
                 const std::string& rule, const fs::path& out_json, const fs::path& confusion_csv,
                 std::uint64_t seed) {
  gazehmm::CandidateMap candidates;
  for (const auto& f : model_files) {
    const auto rec = load_model_file(f);
    if (!rec.label) throw std::runtime_error(f.string() + ": candidate model has no label");
    if (!candidates.emplace(*rec.label, gazehmm::to_hmm(rec)).second) {
      throw std::runtime_error("duplicate candidate label: " + *rec.label);
    }
  }
  const auto seqs = load_sequences(input);
  if (seqs.empty()) throw std::runtime_error("no sequences in " + input.string());

  json reports = json::array();
  std::vector<std::string> predictions, truths;
  for (const auto& s : seqs) {
    gazehmm::ClassificationReport rep;
    if (rule == "loglik") {
      rep = gazehmm::classify_loglik(s.points, candidates);
    } else if (rule == "agreement") {
      rep = gazehmm::classify_agreement(s.points, candidates);
    } else {
      rep = gazehmm::classify_path_distance(s.points, candidates);
    }
    json jr{{"participant_id", s.participant_id},
            {"trial_id", s.trial_id},
            {"rule", rep.rule},
            {"chosen", rep.chosen}};
    json scores;
    for (const auto& [label, v] : rep.scores) scores[label] = v;
    jr["per_label_scores"] = scores;
    if (s.condition != gazehmm::Condition::unknown) {
      jr["truth"] = to_string(s.condition);
      truths.push_back(to_string(s.condition));
      predictions.push_back(rep.chosen);
    }
    reports.push_back(std::move(jr));
  }

  json out{{"rule", rule}, {"reports", reports}, {"meta", run_meta("classify", seed)}};
  if (!truths.empty()) {
    const auto cm = gazehmm::confusion(predictions, truths);
    out["overall_accuracy"] = cm.overall_accuracy;
    if (!confusion_csv.empty()) {
      std::ostringstream os;
      os << "truth";
      for (const auto& l : cm.labels) os << ',' << l;
      os << ",per_class_accuracy\n";
      for (std::size_t r = 0; r < cm.labels.size(); ++r) {
        os << cm.labels[r];
        for (long c : cm.counts[r]) os << ',' << c;
        char buf[32];
        const auto it = cm.per_class_accuracy.find(cm.labels[r]);
        std::snprintf(buf, sizeof(buf), "%.6f", it == cm.per_class_accuracy.end() ? 0.0 : it->second);
        os << ',' << buf << "\n";
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", cm.overall_accuracy);
      os << "overall," << buf << "\n";
      os << csv_meta_line("classify", seed);
      write_text_file(confusion_csv, os.str());
    }
  }
  write_text_file(out_json, out.dump(2) + "\n");
  std::cerr << "classify: " << seqs.size() << " sequences, rule " << rule << "\n";
  return kExitOk;
}

int cmd_simulate(const std::vector<fs::path>& model_files, std::size_t trials, std::size_t len,
                 std::size_t participants, const std::string& label_override, std::uint64_t seed,
                 const fs::path& out_csv) {
  struct Source {
    std::string label;
    gazehmm::GaussianHmm model;
  };
  std::vector<Source> sources;
  for (const auto& f : model_files) {
    const auto rec = load_model_file(f);
    std::string label;
    if (!label_override.empty()) {
      label = label_override;
    } else if (rec.label) {
      label = *rec.label;
    } else {
      throw std::runtime_error(f.string() + ": model has no label; pass --label");
    }
    sources.push_back({label, gazehmm::to_hmm(rec)});
  }
  gazehmm::Rng rng(seed);
  std::vector<gazehmm::FixationRow> rows;
  for (std::size_t p = 0; p < participants; ++p) {
    char pid[32];
    std::snprintf(pid, sizeof(pid), "sim%02zu", p + 1);
    for (const auto& src : sources) {
      for (std::size_t n = 0; n < trials; ++n) {
        const auto draw = gazehmm::sample(src.model, len, rng);
        char tid[64];
        std::snprintf(tid, sizeof(tid), "%s_t%03zu", src.label.c_str(), n + 1);
        for (std::size_t t = 0; t < len; ++t) {
          gazehmm::Fixation f;
          f.start_ms = static_cast<double>(t) * 250.0;
          f.duration_ms = 250.0;
          f.x_px = draw.points[t].x;
          f.y_px = draw.points[t].y;
          f.n_samples = 1;
          rows.push_back({pid, tid, gazehmm::condition_from_string(src.label), f});
        }
      }
    }
  }
  std::ostringstream body;
  gazehmm::write_fixation_csv(body, rows);
  body << csv_meta_line("simulate", seed);
  write_text_file(out_csv, body.str());
  std::cerr << "simulate: wrote " << rows.size() << " fixations\n";
  return kExitOk;
}

int cmd_render(const fs::path& fixations_csv, const fs::path& model_json,
               const fs::path& manifest_json, const fs::path& out_svg, std::uint64_t seed) {
  gazehmm::Manifest man;
  if (!manifest_json.empty()) {
    std::ifstream in(manifest_json, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + manifest_json.string());
    man = gazehmm::read_manifest(in);
  }
  const std::string meta = "meta: " + run_meta("render", seed).dump();
  std::string svg;
  if (!model_json.empty()) {
    svg = gazehmm::render_model_svg(load_model_file(model_json), man, meta);
  } else {
    std::vector<std::vector<gazehmm::Fixation>> trials;
    {
      std::ifstream in(fixations_csv, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open: " + fixations_csv.string());
      const auto rows = gazehmm::parse_fixation_csv(in);
      std::vector<gazehmm::Fixation> cur;
      std::string cur_key;
      for (const auto& r : rows) {
        const std::string key = r.participant_id + "\x1f" + r.trial_id;
        if (key != cur_key && !cur.empty()) {
          trials.push_back(std::move(cur));
          cur.clear();
        }
        cur_key = key;
        cur.push_back(r.fix);
      }
      if (!cur.empty()) trials.push_back(std::move(cur));
    }
    svg = gazehmm::render_scanpath_svg(trials, man, meta);
  }
  write_text_file(out_svg, svg);
  return kExitOk;
}

int cmd_validate(const std::vector<fs::path>& model_files) {
  bool all_clean = true;
  for (const auto& f : model_files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) {
      std::cerr << f.string() << ": cannot open\n";
      return kExitData;
    }
    try {
      const auto rec = gazehmm::read_model_unchecked(nlohmann::json::parse(in));
      const auto violations = gazehmm::validate_model(rec);
      if (violations.empty()) {
        std::cout << f.string() << ": ok\n";
      } else {
        all_clean = false;
        std::cout << f.string() << ": " << violations.size() << " violation(s)\n";
        for (const auto& v : violations) std::cout << "  " << to_string(v) << "\n";
      }
    } catch (const std::exception& e) {
      std::cerr << f.string() << ": " << e.what() << "\n";
      return kExitData;
    }
  }
  return all_clean ? kExitOk : kExitData;
}

int cmd_export_bundled(const fs::path& out_dir, std::uint64_t seed) {
  for (const auto& [name, rec] : gazehmm::load_bundled_models()) {
    gazehmm::ModelRecord copy = rec;
    json meta = rec.meta_json.empty() ? json::object() : json::parse(rec.meta_json);
    meta.update(run_meta("export-bundled", seed));
    copy.meta_json = meta.dump();
    write_text_file(out_dir / (name + ".model.json"), gazehmm::write_model(copy));
  }
  std::cerr << "export-bundled: wrote 5 models to " << out_dir << "\n";
  return kExitOk;
}

/// Keys accepted in a --config JSON file. Explicit flags win over the file.
struct ConfigDefaults {
  std::uint64_t* seed = nullptr;
  gazehmm::IdtConfig* idt = nullptr;
  gazehmm::TrainConfig* train = nullptr;
  gazehmm::VhemConfig* vhem = nullptr;

  void apply(const json& j) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& key = it.key();
      const auto& v = it.value();
      if (key == "seed") *seed = v.get<std::uint64_t>();
      else if (key == "dispersion_px") idt->dispersion_px = v.get<double>();
      else if (key == "min_duration_ms") idt->min_duration_ms = v.get<double>();
      else if (key == "states") train->n_states = v.get<std::size_t>();
      else if (key == "alpha") train->dirichlet_alpha = v.get<double>();
      else if (key == "prior_std") train->prior_cov_std = v.get<double>();
      else if (key == "prior_strength") train->prior_cov_strength = v.get<double>();
      else if (key == "restarts") {
        train->n_restarts = v.get<std::size_t>();
        vhem->n_restarts = v.get<std::size_t>();
      } else if (key == "max_iters") {
        train->max_iters = v.get<std::size_t>();
        vhem->max_iters = v.get<std::size_t>();
      } else if (key == "tol") {
        train->tol = v.get<double>();
        vhem->tol = v.get<double>();
      } else if (key == "k_reduced") vhem->n_reduced = v.get<std::size_t>();
      else if (key == "tau") vhem->virtual_len = v.get<std::size_t>();
      else if (key == "nv") vhem->virtual_count = v.get<double>();
      else throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scanpath HMM toolkit: fixation detection, Gaussian-HMM training, "
               "VHEM model reduction and scanpath classification"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "random seed recorded in every output")->capture_default_str();
  fs::path config_file;
  app.add_option("--config", config_file,
                 "JSON file of defaults (seed, dispersion_px, min_duration_ms, states, alpha, "
                 "prior_std, prior_strength, restarts, max_iters, tol, k_reduced, tau, nv); "
                 "explicit flags override it");

  // fixations
  auto* fx = app.add_subcommand("fixations", "detect fixations in a gaze CSV");
  fs::path fx_in, fx_out, fx_stats;
  gazehmm::IdtConfig idt;
  fx->add_option("input", fx_in, "gaze CSV")->required();
  fx->add_option("-o,--out", fx_out, "fixation CSV output")->required();
  fx->add_option("--stats", fx_stats, "summary statistics JSON output");
  fx->add_option("--dispersion-px", idt.dispersion_px, "I-DT dispersion threshold")
      ->capture_default_str();
  fx->add_option("--min-duration-ms", idt.min_duration_ms, "I-DT minimum window duration")
      ->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "fit one Gaussian-HMM per trial group");
  fs::path tr_in, tr_dir;
  std::string tr_group = "participant,condition";
  gazehmm::TrainConfig tcfg;
  tr->add_option("input", tr_in, "fixation CSV")->required();
  tr->add_option("--out-dir", tr_dir, "output directory for model JSONs")->required();
  tr->add_option("--group-by", tr_group, "comma list of participant,condition")
      ->capture_default_str();
  tr->add_option("--states", tcfg.n_states, "number of hidden states")->capture_default_str();
  tr->add_option("--alpha", tcfg.dirichlet_alpha, "Dirichlet concentration")->capture_default_str();
  tr->add_option("--prior-std", tcfg.prior_cov_std, "covariance prior std (px)")
      ->capture_default_str();
  tr->add_option("--prior-strength", tcfg.prior_cov_strength, "covariance prior pseudo-count")
      ->capture_default_str();
  tr->add_option("--restarts", tcfg.n_restarts, "EM restarts")->capture_default_str();
  tr->add_option("--max-iters", tcfg.max_iters, "EM iteration cap")->capture_default_str();
  tr->add_option("--tol", tcfg.tol, "relative objective tolerance")->capture_default_str();

  // reduce
  auto* rd = app.add_subcommand("reduce", "cluster HMMs into representative models");
  std::vector<fs::path> rd_models;
  fs::path rd_out, rd_assign;
  gazehmm::VhemConfig vcfg;
  rd->add_option("models", rd_models, "model JSON files")->required()->expected(-1);
  rd->add_option("-o,--out", rd_out, "mixture JSON output")->required();
  rd->add_option("--assignments", rd_assign, "assignments CSV output");
  rd->add_option("--k-reduced", vcfg.n_reduced, "number of representative models")
      ->capture_default_str();
  rd->add_option("--tau", vcfg.virtual_len, "virtual sequence length")->capture_default_str();
  rd->add_option("--nv", vcfg.virtual_count, "virtual sequences per base model")
      ->capture_default_str();
  rd->add_option("--restarts", vcfg.n_restarts, "EM restarts")->capture_default_str();
  rd->add_option("--max-iters", vcfg.max_iters, "EM iteration cap")->capture_default_str();
  rd->add_option("--tol", vcfg.tol, "relative ELBO tolerance")->capture_default_str();

  // classify
  auto* cl = app.add_subcommand("classify", "label fixation sequences with candidate models");
  fs::path cl_in, cl_out, cl_conf;
  std::vector<fs::path> cl_models;
  std::string cl_rule = "loglik";
  cl->add_option("input", cl_in, "fixation CSV")->required();
  cl->add_option("--model", cl_models, "candidate model JSONs")->required()->expected(-1);
  cl->add_option("--rule", cl_rule, "decision rule")
      ->check(CLI::IsMember({"loglik", "agreement", "path-distance"}))
      ->capture_default_str();
  cl->add_option("-o,--out", cl_out, "report JSON output")->required();
  cl->add_option("--confusion", cl_conf, "confusion CSV output (needs truth labels)");

  // simulate
  auto* sm = app.add_subcommand("simulate", "sample fixation sequences from models");
  std::vector<fs::path> sm_models;
  fs::path sm_out;
  std::size_t sm_trials = 1, sm_len = 19, sm_participants = 1;
  std::string sm_label;
  sm->add_option("models", sm_models, "source model JSONs")->required()->expected(-1);
  sm->add_option("-o,--out", sm_out, "fixation CSV output")->required();
  sm->add_option("--trials", sm_trials, "trials per participant per model")->capture_default_str();
  sm->add_option("--len", sm_len, "fixations per trial")->capture_default_str();
  sm->add_option("--participants", sm_participants, "synthetic participant count")
      ->capture_default_str();
  sm->add_option("--label", sm_label, "condition label for unlabeled models");

  // render
  auto* rn = app.add_subcommand("render", "render fixations or a model as SVG");
  fs::path rn_fix, rn_model, rn_manifest, rn_out;
  rn->add_option("--fixations", rn_fix, "fixation CSV input");
  rn->add_option("--model", rn_model, "model JSON input");
  rn->add_option("--manifest", rn_manifest, "dataset manifest JSON");
  rn->add_option("-o,--out", rn_out, "SVG output")->required();

  // validate
  auto* vd = app.add_subcommand("validate", "check model JSONs against the invariants");
  std::vector<fs::path> vd_models;
  vd->add_option("models", vd_models, "model JSON files")->required()->expected(-1);

  // export-bundled
  auto* eb = app.add_subcommand("export-bundled", "write the five built-in models");
  fs::path eb_dir;
  eb->add_option("--out-dir", eb_dir, "output directory")->required();

  // config file values act as defaults; explicit flags override them, so
  // the file is applied before parsing
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string value;
    if (arg == "--config" && i + 1 < argc) value = argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) value = arg.substr(9);
    if (!value.empty()) {
      try {
        std::ifstream in(value, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + value);
        ConfigDefaults defaults{&seed, &idt, &tcfg, &vcfg};
        defaults.apply(json::parse(in));
      } catch (const std::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitData;
      }
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (fx->parsed()) return cmd_fixations(fx_in, fx_out, fx_stats, idt, seed);
    if (tr->parsed()) {
      tcfg.seed = seed;
      return cmd_train(tr_in, tr_dir, tr_group, tcfg);
    }
    if (rd->parsed()) {
      vcfg.seed = seed;
      return cmd_reduce(rd_models, rd_out, rd_assign, vcfg);
    }
    if (cl->parsed()) return cmd_classify(cl_in, cl_models, cl_rule, cl_out, cl_conf, seed);
    if (sm->parsed()) return cmd_simulate(sm_models, sm_trials, sm_len, sm_participants, sm_label,
                                          seed, sm_out);
    if (rn->parsed()) {
      if (rn_fix.empty() == rn_model.empty()) {
        std::cerr << "error: pass exactly one of --fixations or --model\n";
        return kExitUsage;
      }
      return cmd_render(rn_fix, rn_model, rn_manifest, rn_out, seed);
    }
    if (vd->parsed()) return cmd_validate(vd_models);
    if (eb->parsed()) return cmd_export_bundled(eb_dir, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
