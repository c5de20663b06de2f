#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vad/audio.hpp"
#include "vad/dataset.hpp"
#include "vad/ensemble.hpp"
#include "vad/error.hpp"
#include "vad/eval.hpp"
#include "vad/mfcc.hpp"
#include "vad/mlp.hpp"
#include "vad/svm.hpp"
#include "vad/synth.hpp"
#include "vad/util.hpp"

namespace {

using vad::Error;
using vad::ErrorKind;
using vad::fail;

// Everything a command can pick up from the config file. Flags win over file
// values, which win over these defaults.
struct RunConfig {
  vad::FrameSpec frame;
  vad::MfccConfig mfcc;
  double gate_threshold = 0.0;
  bool gate_threshold_set = false;  // fixed threshold instead of the 5th percentile
  bool drop_silent = true;

  vad::SvmHyperparams svm;
  bool svm_c_set = false;
  bool svm_gamma_set = false;
  int folds = 2;

  std::size_t n_members = 5;
  bool per_member_grid = false;
  std::optional<vad::SvmHyperparams> member_hp;
  std::optional<vad::SvmHyperparams> meta_hp;

  vad::MlpConfig mlp;

  std::size_t n_speech = 10;
  std::size_t n_noise = 10;
  double clip_seconds = 2.0;
  std::uint32_t sample_rate_hz = 16000;

  std::uint64_t seed = 0;
  int jobs = 1;
  double threshold = 0.5;  // probability threshold for eval / predict
};

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidConfig, "config key '" + key + "': bad number '" + value + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidConfig, "config key '" + key + "': bad integer '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(ErrorKind::InvalidConfig, "config key '" + key + "': bad boolean '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key = value lines; # starts a comment; quotes around values are optional.
void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open config file " + path);

  double member_c = 0.0, member_gamma = 0.0, meta_c = 0.0, meta_gamma = 0.0;
  bool member_c_set = false, member_gamma_set = false;
  bool meta_c_set = false, meta_gamma_set = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::InvalidConfig,
           path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);

    if (key == "frame_ms") cfg.frame.frame_ms = parse_double(key, value);
    else if (key == "overlap_ms") cfg.frame.overlap_ms = parse_double(key, value);
    else if (key == "n_coeffs") cfg.mfcc.n_coeffs = parse_uint(key, value);
    else if (key == "n_filters") cfg.mfcc.n_filters = parse_uint(key, value);
    else if (key == "fft_size") cfg.mfcc.fft_size = parse_uint(key, value);
    else if (key == "preemphasis") cfg.mfcc.preemphasis = parse_double(key, value);
    else if (key == "mel_low_hz") cfg.mfcc.mel_low_hz = parse_double(key, value);
    else if (key == "mel_high_hz") cfg.mfcc.mel_high_hz = parse_double(key, value);
    else if (key == "log_floor") cfg.mfcc.log_floor = parse_double(key, value);
    else if (key == "gate_threshold") {
      cfg.gate_threshold = parse_double(key, value);
      cfg.gate_threshold_set = true;
    } else if (key == "drop_silent") cfg.drop_silent = parse_bool(key, value);
    else if (key == "c") {
      cfg.svm.c = parse_double(key, value);
      cfg.svm_c_set = true;
    } else if (key == "gamma") {
      cfg.svm.gamma = parse_double(key, value);
      cfg.svm_gamma_set = true;
    } else if (key == "tol") cfg.svm.tol = parse_double(key, value);
    else if (key == "max_iter") cfg.svm.max_iter = parse_uint(key, value);
    else if (key == "cache_rows") cfg.svm.cache_rows = parse_uint(key, value);
    else if (key == "folds") cfg.folds = static_cast<int>(parse_uint(key, value));
    else if (key == "n_members") cfg.n_members = parse_uint(key, value);
    else if (key == "per_member_grid") cfg.per_member_grid = parse_bool(key, value);
    else if (key == "member_c") { member_c = parse_double(key, value); member_c_set = true; }
    else if (key == "member_gamma") { member_gamma = parse_double(key, value); member_gamma_set = true; }
    else if (key == "meta_c") { meta_c = parse_double(key, value); meta_c_set = true; }
    else if (key == "meta_gamma") { meta_gamma = parse_double(key, value); meta_gamma_set = true; }
    else if (key == "epochs") cfg.mlp.epochs = parse_uint(key, value);
    else if (key == "batch_size") cfg.mlp.batch_size = parse_uint(key, value);
    else if (key == "learning_rate") cfg.mlp.learning_rate = parse_double(key, value);
    else if (key == "beta1") cfg.mlp.beta1 = parse_double(key, value);
    else if (key == "beta2") cfg.mlp.beta2 = parse_double(key, value);
    else if (key == "epsilon") cfg.mlp.epsilon = parse_double(key, value);
    else if (key == "validation_split") cfg.mlp.validation_split = parse_double(key, value);
    else if (key == "init_range") cfg.mlp.init_range = parse_double(key, value);
    else if (key == "standardize") cfg.mlp.standardize = parse_bool(key, value);
    else if (key == "n_speech") cfg.n_speech = parse_uint(key, value);
    else if (key == "n_noise") cfg.n_noise = parse_uint(key, value);
    else if (key == "clip_seconds") cfg.clip_seconds = parse_double(key, value);
    else if (key == "sample_rate") cfg.sample_rate_hz = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "seed") cfg.seed = parse_uint(key, value);
    else if (key == "jobs") cfg.jobs = static_cast<int>(parse_uint(key, value));
    else if (key == "threshold") cfg.threshold = parse_double(key, value);
    else
      fail(ErrorKind::InvalidConfig,
           path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }

  if (member_c_set != member_gamma_set)
    fail(ErrorKind::InvalidConfig, "member_c and member_gamma must be set together");
  if (meta_c_set != meta_gamma_set)
    fail(ErrorKind::InvalidConfig, "meta_c and meta_gamma must be set together");
  if (member_c_set) {
    vad::SvmHyperparams hp = cfg.svm;
    hp.c = member_c;
    hp.gamma = member_gamma;
    cfg.member_hp = hp;
  }
  if (meta_c_set) {
    vad::SvmHyperparams hp = cfg.svm;
    hp.c = meta_c;
    hp.gamma = meta_gamma;
    cfg.meta_hp = hp;
  }
}

nlohmann::json extract_echo(const RunConfig& cfg) {
  return {{"frame_ms", cfg.frame.frame_ms},
          {"overlap_ms", cfg.frame.overlap_ms},
          {"n_coeffs", cfg.mfcc.n_coeffs},
          {"n_filters", cfg.mfcc.n_filters},
          {"fft_size", cfg.mfcc.fft_size},
          {"preemphasis", cfg.mfcc.preemphasis},
          {"mel_low_hz", cfg.mfcc.mel_low_hz},
          {"mel_high_hz", cfg.mfcc.mel_high_hz},
          {"log_floor", cfg.mfcc.log_floor},
          {"drop_silent", cfg.drop_silent},
          {"fixed_gate_threshold", cfg.gate_threshold_set}};
}

void write_json_artifact(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::IoError, "failed writing " + path);
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedHeader, path + ": " + e.what());
  }
  return j;
}

vad::ExtractOptions extract_options(const RunConfig& cfg) {
  vad::ExtractOptions opts;
  opts.frame = cfg.frame;
  opts.mfcc = cfg.mfcc;
  opts.gate.energy_threshold = cfg.gate_threshold;
  opts.auto_threshold = !cfg.gate_threshold_set;
  opts.drop_silent = cfg.drop_silent;
  opts.jobs = cfg.jobs;
  return opts;
}

int cmd_extract(const RunConfig& cfg, const std::string& manifest_path,
                const std::string& out_path) {
  const auto manifest = vad::read_manifest(manifest_path);
  vad::ExtractResult result = vad::extract_dataset(manifest, extract_options(cfg));

  vad::FeatureFileMeta meta;
  meta.gate_threshold = result.gate_threshold;
  meta.seed = cfg.seed;
  meta.config_echo = extract_echo(cfg);
  meta.clip_paths = result.clip_paths;
  vad::write_vadf(out_path, result.data, meta);

  std::cout << "clips: " << manifest.size() << "\n"
            << "speech frames: " << result.n_speech << "\n"
            << "non-speech frames: " << result.n_nonspeech << "\n"
            << "dropped silent frames: " << result.n_dropped_silent << "\n"
            << "gate threshold: " << result.gate_threshold << "\n"
            << "wrote " << out_path << "\n";
  return 0;
}

vad::EnsembleConfig ensemble_config(const RunConfig& cfg) {
  vad::EnsembleConfig ec;
  ec.n_members = cfg.n_members;
  ec.member_hp = cfg.member_hp;
  ec.per_member_grid = cfg.per_member_grid;
  ec.meta_hp = cfg.meta_hp;
  ec.grid = vad::default_grid();
  ec.grid.folds = cfg.folds;
  ec.base = cfg.svm;
  ec.seed = cfg.seed;
  ec.jobs = cfg.jobs;
  return ec;
}

nlohmann::json train_echo(const RunConfig& cfg, const std::string& kind) {
  nlohmann::json j{{"kind", kind}, {"seed", cfg.seed}, {"folds", cfg.folds}};
  if (kind == "nn") {
    j["epochs"] = cfg.mlp.epochs;
    j["batch_size"] = cfg.mlp.batch_size;
    j["learning_rate"] = cfg.mlp.learning_rate;
    j["validation_split"] = cfg.mlp.validation_split;
    j["standardize"] = cfg.mlp.standardize;
  } else {
    j["tol"] = cfg.svm.tol;
    j["max_iter"] = cfg.svm.max_iter;
  }
  if (kind == "ensemble") {
    j["n_members"] = cfg.n_members;
    j["per_member_grid"] = cfg.per_member_grid;
  }
  return j;
}

int cmd_train(const RunConfig& cfg, const std::string& features_path,
              const std::string& kind, const std::string& out_path) {
  vad::FeatureFile ff = vad::read_vadf(features_path);
  nlohmann::json artifact;

  if (kind == "svm") {
    vad::SvmHyperparams hp = cfg.svm;
    if (!(cfg.svm_c_set && cfg.svm_gamma_set)) {
      vad::GridSpec grid = vad::default_grid();
      grid.folds = cfg.folds;
      vad::GridResult gr = vad::grid_search(ff.data, grid, cfg.seed, cfg.svm, cfg.jobs);
      hp = gr.best;
      std::cout << "grid search: C=" << hp.c << " gamma=" << hp.gamma
                << " cv_accuracy=" << gr.cv_accuracy << "\n";
    }
    vad::SvmModel model = vad::train_svm(ff.data, hp);
    if (!model.converged)
      fail(ErrorKind::IterationLimit, "SMO hit the iteration cap");
    artifact = vad::svm_to_json(model);
    std::cout << "support vectors: " << model.n_support() << "/"
              << ff.data.rows() << "\n";
  } else if (kind == "ensemble") {
    vad::EnsembleModel ens = vad::train_ensemble(ff.data, ensemble_config(cfg));
    artifact = vad::ensemble_to_json(ens);
    std::cout << "members: " << ens.members.size() << ", meta support vectors: "
              << ens.meta.n_support() << "\n";
  } else if (kind == "nn") {
    vad::MlpConfig mc = cfg.mlp;
    mc.seed = cfg.seed;
    vad::MlpModel model = vad::train_mlp(ff.data, mc);
    artifact = vad::mlp_to_json(model);
    if (!model.history.val_accuracy.empty())
      std::cout << "final validation accuracy: "
                << model.history.val_accuracy.back() << "\n";
    else if (!model.history.train_accuracy.empty())
      std::cout << "final training accuracy: "
                << model.history.train_accuracy.back() << "\n";
  } else {
    fail(ErrorKind::InvalidConfig, "unknown model kind '" + kind +
                                       "' (expected svm|ensemble|nn)");
  }

  artifact["kind"] = kind;
  artifact["cli_config"] = train_echo(cfg, kind);
  write_json_artifact(out_path, artifact);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

// Scores a feature row with whatever model kind the artifact declares.
struct LoadedModel {
  std::string kind;
  vad::SvmModel svm;
  vad::EnsembleModel ens;
  vad::MlpModel mlp;

  double prob(std::span<const double> x) const {
    if (kind == "svm") return vad::predict_prob(svm, x);
    if (kind == "ensemble") return vad::predict(ens, x).prob;
    return vad::forward(mlp, x);
  }
};

LoadedModel load_model(const std::string& path) {
  const nlohmann::json j = load_json(path);
  LoadedModel m;
  m.kind = j.value("kind", "");
  if (m.kind == "svm") m.svm = vad::svm_from_json(j);
  else if (m.kind == "ensemble") m.ens = vad::ensemble_from_json(j);
  else if (m.kind == "nn") m.mlp = vad::mlp_from_json(j);
  else fail(ErrorKind::MalformedHeader, path + ": unknown model kind");
  return m;
}

std::string default_roc_path(const std::string& report_path) {
  const auto dot = report_path.rfind('.');
  const std::string stem =
      dot == std::string::npos ? report_path : report_path.substr(0, dot);
  return stem + "_roc.csv";
}

int cmd_eval(const RunConfig& cfg, const std::string& model_path,
             const std::string& features_path, const std::string& report_path,
             std::string roc_path) {
  const LoadedModel model = load_model(model_path);
  vad::FeatureFile ff = vad::read_vadf(features_path);
  if (roc_path.empty()) roc_path = default_roc_path(report_path);

  const vad::GateConfig gate{ff.meta.gate_threshold};
  std::vector<double> scored_scores, all_scores;
  std::vector<std::int8_t> scored_labels;
  std::size_t n_silent = 0;
  all_scores.resize(ff.data.rows());

  std::vector<std::uint8_t> silent(ff.data.rows(), 0);
  for (std::size_t i = 0; i < ff.data.rows(); ++i)
    silent[i] = vad::is_silent(ff.data.row(i), gate) ? 1 : 0;

  vad::parallel_for(ff.data.rows(), cfg.jobs, [&](std::size_t i) {
    all_scores[i] = silent[i] ? 0.0 : model.prob(ff.data.row(i));
  });
  for (std::size_t i = 0; i < ff.data.rows(); ++i) {
    if (silent[i]) {
      ++n_silent;
      continue;
    }
    scored_scores.push_back(all_scores[i]);
    scored_labels.push_back(ff.data.labels[i]);
  }

  // Gated frames count as non-speech (score 0). Reported both ways because
  // it is unclear whether gated frames belong in the headline accuracy.
  vad::EvalReport scored_only =
      vad::evaluate_scores(scored_scores, scored_labels, cfg.threshold);
  vad::EvalReport with_gated =
      vad::evaluate_scores(all_scores, ff.data.labels, cfg.threshold);

  nlohmann::json j;
  j["kind"] = model.kind;
  j["model"] = model_path;
  j["features"] = features_path;
  j["seed"] = cfg.seed;
  j["threshold"] = cfg.threshold;
  j["gate_threshold"] = ff.meta.gate_threshold;
  j["n_frames"] = ff.data.rows();
  j["n_gated_silent"] = n_silent;
  j["scored_only"] = vad::report_to_json(scored_only);
  j["with_gated"] = vad::report_to_json(with_gated);
  write_json_artifact(report_path, j);
  vad::write_roc_csv(roc_path, scored_only.roc);

  std::cout << "frames: " << ff.data.rows() << " (" << n_silent << " gated silent)\n"
            << "accuracy (scored frames): " << scored_only.accuracy << "\n"
            << "accuracy (with gated): " << with_gated.accuracy << "\n"
            << "auc: " << scored_only.auc << "\n"
            << "tpr: " << scored_only.tpr << ", fpr: " << scored_only.fpr << "\n"
            << "wrote " << report_path << " and " << roc_path << "\n";
  return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& model_path,
                const std::string& features_path, const std::string& out_path) {
  const LoadedModel model = load_model(model_path);
  vad::FeatureFile ff = vad::read_vadf(features_path);
  const vad::GateConfig gate{ff.meta.gate_threshold};

  std::vector<double> probs(ff.data.rows());
  std::vector<std::uint8_t> silent(ff.data.rows(), 0);
  for (std::size_t i = 0; i < ff.data.rows(); ++i)
    silent[i] = vad::is_silent(ff.data.row(i), gate) ? 1 : 0;
  vad::parallel_for(ff.data.rows(), cfg.jobs, [&](std::size_t i) {
    probs[i] = silent[i] ? 0.0 : model.prob(ff.data.row(i));
  });

  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + out_path + " for writing");
  out << "clip_id,frame_index,gated,prob,label\n";
  char buf[128];
  for (std::size_t i = 0; i < ff.data.rows(); ++i) {
    const auto& prov = ff.data.provenance[i];
    const int label = !silent[i] && probs[i] >= cfg.threshold ? 1 : -1;
    std::snprintf(buf, sizeof(buf), "%u,%u,%d,%.17g,%d\n", prov.clip_id,
                  prov.frame_index, silent[i] ? 1 : 0, probs[i], label);
    out << buf;
  }
  if (!out) fail(ErrorKind::IoError, "failed writing " + out_path);
  std::cout << "wrote " << out_path << " (" << ff.data.rows() << " rows)\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& features_path,
              const std::string& test_path, std::size_t n_max,
              const std::string& out_path) {
  if (n_max < 1) fail(ErrorKind::InvalidConfig, "n-members must be at least 1");
  vad::FeatureFile train_ff = vad::read_vadf(features_path);

  vad::Dataset train_data, test_data;
  if (!test_path.empty()) {
    train_data = std::move(train_ff.data);
    test_data = std::move(vad::read_vadf(test_path).data);
  } else {
    // Hold out a seeded 20% for measurement when no test set is given.
    const vad::Dataset& all = train_ff.data;
    std::vector<std::size_t> order(all.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    vad::Rng rng(vad::derive_seed(cfg.seed, 0x5eed, 0));
    rng.shuffle(order);
    const std::size_t n_test = all.rows() / 5;
    train_data.dim = test_data.dim = all.dim;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t i = order[k];
      (k < all.rows() - n_test ? train_data : test_data)
          .push_row(all.row(i), all.labels[i]);
    }
  }
  if (test_data.rows() == 0) fail(ErrorKind::EmptyDataset, "no test rows");

  // Portion size is fixed by the largest ensemble: an n-member ensemble
  // consumes n+1 of the n_max+1 portions, so every member at every n trains
  // on the same number of rows and the sweep isolates the effect of width.
  std::vector<std::size_t> pool(train_data.rows());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  vad::Rng pool_rng(vad::derive_seed(cfg.seed, 0x5eed, 1));
  pool_rng.shuffle(pool);
  const std::size_t portion = train_data.rows() / (n_max + 1);
  if (portion == 0) fail(ErrorKind::TooFewRows, "not enough rows for the sweep");

  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + out_path + " for writing");
  out << "# seed=" << cfg.seed << " folds=" << cfg.folds
      << " train_rows=" << train_data.rows() << " test_rows=" << test_data.rows()
      << " portion_rows=" << portion << "\n";
  out << "n,ensemble_accuracy,mean_member_accuracy,min_member_accuracy,"
         "max_member_accuracy,member_accuracies\n";

  char buf[256];
  for (std::size_t n = 1; n <= n_max; ++n) {
    RunConfig run = cfg;
    run.n_members = n;
    vad::Dataset slice;
    slice.dim = train_data.dim;
    for (std::size_t k = 0; k < portion * (n + 1); ++k)
      slice.push_row(train_data.row(pool[k]), train_data.labels[pool[k]]);
    vad::EnsembleModel ens = vad::train_ensemble(slice, ensemble_config(run));

    std::vector<int> ens_preds(test_data.rows());
    std::vector<std::vector<int>> member_preds(n, std::vector<int>(test_data.rows()));
    vad::parallel_for(test_data.rows(), cfg.jobs, [&](std::size_t i) {
      const auto row = test_data.row(i);
      ens_preds[i] = vad::predict(ens, row).label;
      for (std::size_t m = 0; m < n; ++m)
        member_preds[m][i] =
            vad::predict_prob(ens.members[m], row) >= 0.5 ? +1 : -1;
    });

    const double ens_acc = vad::accuracy(ens_preds, test_data.labels);
    std::vector<double> member_acc(n);
    for (std::size_t m = 0; m < n; ++m)
      member_acc[m] = vad::accuracy(member_preds[m], test_data.labels);
    const double mean_acc = vad::mean(member_acc);
    const double min_acc = *std::min_element(member_acc.begin(), member_acc.end());
    const double max_acc = *std::max_element(member_acc.begin(), member_acc.end());

    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f,", n, ens_acc,
                  mean_acc, min_acc, max_acc);
    out << buf;
    for (std::size_t m = 0; m < n; ++m) {
      std::snprintf(buf, sizeof(buf), "%s%.6f", m ? "|" : "", member_acc[m]);
      out << buf;
    }
    out << "\n";
    std::cout << "n=" << n << " ensemble=" << ens_acc << " members(mean)="
              << mean_acc << "\n";
  }
  if (!out) fail(ErrorKind::IoError, "failed writing " + out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg, const std::string& out_dir,
              std::string manifest_path) {
  vad::SynthSpec spec;
  spec.n_speech = cfg.n_speech;
  spec.n_noise = cfg.n_noise;
  spec.clip_seconds = cfg.clip_seconds;
  spec.sample_rate_hz = cfg.sample_rate_hz;
  spec.seed = cfg.seed;
  if (manifest_path.empty()) manifest_path = out_dir + "/manifest.csv";

  vad::SynthCorpus corpus = vad::generate_corpus(spec);
  const auto entries = vad::write_corpus(corpus, out_dir, manifest_path);
  std::cout << "wrote " << entries.size() << " clips under " << out_dir
            << " and manifest " << manifest_path << "\n";
  return 0;
}

int cmd_grid_search(const RunConfig& cfg, const std::string& features_path,
                    const std::string& out_path) {
  vad::FeatureFile ff = vad::read_vadf(features_path);
  vad::GridSpec grid = vad::default_grid();
  grid.folds = cfg.folds;
  vad::GridResult gr = vad::grid_search(ff.data, grid, cfg.seed, cfg.svm, cfg.jobs);

  nlohmann::json j;
  j["best"] = {{"C", gr.best.c}, {"gamma", gr.best.gamma}};
  j["cv_accuracy"] = gr.cv_accuracy;
  j["folds"] = cfg.folds;
  j["seed"] = cfg.seed;
  j["c_values"] = grid.c_values;
  j["gamma_values"] = grid.gamma_values;
  write_json_artifact(out_path, j);
  std::cout << "best C=" << gr.best.c << " gamma=" << gr.best.gamma
            << " cv_accuracy=" << gr.cv_accuracy << "\n"
            << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice activity detection toolkit: MFCC extraction, stacked "
               "SVM ensembles, an MLP baseline, and evaluation"};
  app.require_subcommand(1);

  std::string manifest, features, model, kind, config, out, report, roc, test;
  std::uint64_t seed = 0;
  double threshold = 0.0, seconds = 0.0, gate = 0.0;
  std::size_t n_members = 0, n_speech = 0, n_noise = 0;
  int jobs = 0;
  bool keep_silent = false;

  auto* extract = app.add_subcommand("extract", "Featurize a manifest of WAV files");
  extract->add_option("--manifest", manifest, "CSV of path,label rows")->required();
  extract->add_option("--out", out, "output feature file")->required();
  extract->add_option("--config", config, "key = value config file");
  extract->add_option("--seed", seed, "seed recorded in the artifact");
  extract->add_option("--threshold", gate, "fixed gate threshold (disables the percentile rule)");
  extract->add_option("--jobs", jobs, "worker threads");
  extract->add_flag("--keep-silent", keep_silent, "keep gated frames in the output");

  auto* train = app.add_subcommand("train", "Train a model on a feature file");
  train->add_option("--features", features, "feature file")->required();
  train->add_option("--kind", kind, "svm | ensemble | nn")->required();
  train->add_option("--out", out, "output model file")->required();
  train->add_option("--config", config, "key = value config file");
  train->add_option("--seed", seed, "partition / shuffle seed");
  train->add_option("--n-members", n_members, "ensemble members");
  train->add_option("--jobs", jobs, "worker threads");

  auto* sweep = app.add_subcommand("sweep", "Ensemble accuracy for n = 1..n-members");
  sweep->add_option("--features", features, "training feature file")->required();
  sweep->add_option("--out", out, "output CSV")->required();
  sweep->add_option("--test", test, "test feature file (default: held-out 20%)");
  sweep->add_option("--n-members", n_members, "largest ensemble size (default 6)");
  sweep->add_option("--config", config, "key = value config file");
  sweep->add_option("--seed", seed, "partition seed shared by all sizes");
  sweep->add_option("--jobs", jobs, "worker threads");

  auto* eval = app.add_subcommand("eval", "Evaluate a model on a feature file");
  eval->add_option("--model", model, "model file")->required();
  eval->add_option("--features", features, "feature file")->required();
  eval->add_option("--report", report, "output report JSON")->required();
  eval->add_option("--roc", roc, "output ROC CSV (default: <report>_roc.csv)");
  eval->add_option("--threshold", threshold, "probability threshold (default 0.5)");
  eval->add_option("--config", config, "key = value config file");
  eval->add_option("--jobs", jobs, "worker threads");

  auto* predict = app.add_subcommand("predict", "Per-frame probabilities as CSV");
  predict->add_option("--model", model, "model file")->required();
  predict->add_option("--features", features, "feature file")->required();
  predict->add_option("--out", out, "output CSV")->required();
  predict->add_option("--threshold", threshold, "probability threshold (default 0.5)");
  predict->add_option("--config", config, "key = value config file");
  predict->add_option("--jobs", jobs, "worker threads");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic WAV corpus");
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--manifest", manifest, "manifest path (default: <out>/manifest.csv)");
  synth->add_option("--n-speech", n_speech, "speech clips (default 10)");
  synth->add_option("--n-noise", n_noise, "noise/music clips (default 10)");
  synth->add_option("--seconds", seconds, "clip length (default 2.0)");
  synth->add_option("--config", config, "key = value config file");
  synth->add_option("--seed", seed, "corpus seed");

  auto* grid = app.add_subcommand("grid-search", "Exhaustive (C, gamma) search");
  grid->add_option("--features", features, "feature file")->required();
  grid->add_option("--out", out, "output JSON")->required();
  grid->add_option("--config", config, "key = value config file");
  grid->add_option("--seed", seed, "fold seed");
  grid->add_option("--jobs", jobs, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    RunConfig cfg;
    if (!config.empty()) apply_config_file(config, cfg);

    // Flags win over the config file.
    auto* active = app.get_subcommands().front();
    auto flag_set = [&](const std::string& name) -> bool {
      try {
        return active->count(name) > 0;
      } catch (const CLI::OptionNotFound&) {
        return false;
      }
    };
    if (flag_set("--seed")) cfg.seed = seed;
    if (flag_set("--jobs")) cfg.jobs = jobs;
    if (cfg.jobs < 1) fail(ErrorKind::InvalidConfig, "jobs must be at least 1");

    if (app.got_subcommand(extract)) {
      if (flag_set("--threshold")) {
        cfg.gate_threshold = gate;
        cfg.gate_threshold_set = true;
      }
      if (keep_silent) cfg.drop_silent = false;
      return cmd_extract(cfg, manifest, out);
    }
    if (app.got_subcommand(train)) {
      if (flag_set("--n-members")) cfg.n_members = n_members;
      return cmd_train(cfg, features, kind, out);
    }
    if (app.got_subcommand(sweep)) {
      const std::size_t n_max = flag_set("--n-members") ? n_members : 6;
      return cmd_sweep(cfg, features, test, n_max, out);
    }
    if (app.got_subcommand(eval)) {
      if (flag_set("--threshold")) cfg.threshold = threshold;
      return cmd_eval(cfg, model, features, report, roc);
    }
    if (app.got_subcommand(predict)) {
      if (flag_set("--threshold")) cfg.threshold = threshold;
      return cmd_predict(cfg, model, features, out);
    }
    if (app.got_subcommand(synth)) {
      if (flag_set("--n-speech")) cfg.n_speech = n_speech;
      if (flag_set("--n-noise")) cfg.n_noise = n_noise;
      if (flag_set("--seconds")) cfg.clip_seconds = seconds;
      return cmd_synth(cfg, out, manifest);
    }
    if (app.got_subcommand(grid)) return cmd_grid_search(cfg, features, out);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error (" << vad::error_kind_name(e.kind()) << "): " << e.what()
              << "\n";
    switch (e.kind()) {
      case ErrorKind::InvalidConfig:
        return 1;
      case ErrorKind::IterationLimit:
        return 3;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
