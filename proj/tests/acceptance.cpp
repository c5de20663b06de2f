// Acceptance gate for the toolkit: ten numbered checks, one line each, exit
// code equal to the number of failures. Oracle comparisons use the reference
// implementations in oracles.hpp; pipeline checks drive the real CLI binary.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
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

#ifndef VADKIT_BIN
#error "VADKIT_BIN must point at the CLI binary"
#endif

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

vad::Dataset blobs(vad::Rng& rng, std::size_t n_per_class, std::size_t dim,
                   double separation) {
  vad::Dataset d;
  d.dim = dim;
  std::vector<double> row(dim);
  for (int cls : {+1, -1}) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      for (std::size_t k = 0; k < dim; ++k)
        row[k] = rng.normal() + (cls > 0 ? separation : -separation);
      d.push_row(row, static_cast<std::int8_t>(cls));
    }
  }
  return d;
}

// Q_ij = y_i y_j K(x_i, x_j) over the model's standardized rows.
std::vector<std::vector<double>> build_q(const vad::Dataset& data,
                                         const vad::Scaler& scaler,
                                         double gamma,
                                         std::vector<std::vector<double>>* k_out) {
  const std::size_t n = data.rows();
  std::vector<std::vector<double>> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = vad::standardize_apply(scaler, data.row(i));
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  if (k_out) k_out->assign(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double k = vad::rbf_kernel(x[i], x[j], gamma);
      if (k_out) (*k_out)[i][j] = k;
      q[i][j] = static_cast<double>(data.labels[i]) *
                static_cast<double>(data.labels[j]) * k;
    }
  }
  return q;
}

// --- criterion 1: SMO dual objective and predictions match the QP oracle ---

Outcome smo_matches_qp_oracle() {
  constexpr double kObjectiveTol = 1e-3;
  constexpr int kTrials = 50;

  vad::Rng rng(0xacc1);
  double worst_gap = 0.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t dim = 1 + rng.uniform_index(4);
    const std::size_t per_class = 3 + rng.uniform_index(8);  // 6..20 points
    vad::Dataset data = blobs(rng, per_class, dim, rng.uniform(0.2, 1.5));

    vad::SvmHyperparams hp;
    hp.c = rng.uniform(0.1, 10.0);
    hp.gamma = rng.uniform(0.1, 2.0);
    hp.tol = 1e-5;
    const vad::SvmTrainResult res = vad::train_svm_detailed(data, hp);
    if (!res.model.converged) return {false, "smo failed to converge"};

    std::vector<std::vector<double>> kernel;
    const auto q = build_q(data, res.model.scaler, hp.gamma, &kernel);
    std::vector<double> y(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) y[i] = data.labels[i];
    const oracle::QpSolution ref = oracle::qp_reference_solve(q, y, hp.c);

    const double gap = std::fabs(oracle::qp_objective(q, res.alpha) - ref.objective);
    worst_gap = std::max(worst_gap, gap);
    if (gap > kObjectiveTol)
      return {false, fmt("objective gap %.3g on trial %g", gap, trial)};

    const auto ref_decisions = oracle::qp_decisions(kernel, y, ref.alpha, hp.c);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const int mine = res.train_decisions[i] >= 0.0 ? +1 : -1;
      const int theirs = ref_decisions[i] >= 0.0 ? +1 : -1;
      if (mine != theirs)
        return {false, fmt("prediction mismatch on trial %g row %g",
                           static_cast<double>(trial), static_cast<double>(i))};
    }
  }
  return {true, fmt("50 problems, worst objective gap %.2g", worst_gap)};
}

// --- criterion 2: banded KKT conditions on every converged model ---

Outcome kkt_bands_hold() {
  constexpr double kSlack = 1e-9;  // float round-off on top of hp.tol
  constexpr int kTrials = 100;

  vad::Rng rng(0xacc2);
  double worst = 0.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t dim = 2 + rng.uniform_index(7);
    const std::size_t per_class = 5 + rng.uniform_index(26);  // 10..60 points
    vad::Dataset data = blobs(rng, per_class, dim, rng.uniform(0.3, 2.0));

    vad::SvmHyperparams hp;
    hp.c = std::exp(rng.uniform(std::log(0.05), std::log(50.0)));
    hp.gamma = std::exp(rng.uniform(std::log(0.01), std::log(4.0)));
    const vad::SvmTrainResult res = vad::train_svm_detailed(data, hp);
    if (!res.model.converged) return {false, "smo failed to converge"};

    const double band = hp.tol + kSlack;
    std::size_t positive_alpha = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const double yf =
          static_cast<double>(data.labels[i]) * res.train_decisions[i];
      const double a = res.alpha[i];
      double violation = 0.0;
      if (a <= 0.0) {
        violation = std::max(0.0, (1.0 - band) - yf);
      } else if (a >= hp.c) {
        violation = std::max(0.0, yf - (1.0 + band));
        ++positive_alpha;
      } else {
        violation = std::max(0.0, std::fabs(yf - 1.0) - band);
        ++positive_alpha;
      }
      worst = std::max(worst, violation);
      if (violation > 0.0)
        return {false, fmt("kkt violation %.3g beyond tol band on trial %g",
                           violation, static_cast<double>(trial))};
    }
    if (res.model.n_support() != positive_alpha)
      return {false, "support vector set is not {alpha > 0}"};
  }
  return {true, fmt("100 models, worst band excess %.2g", worst)};
}

// --- criterion 3: Platt calibration matches a fine grid oracle ---

Outcome platt_matches_grid() {
  constexpr double kNllTol = 1e-4;
  constexpr int kTrials = 20;

  vad::Rng rng(0xacc3);
  double worst = 0.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = 20 + rng.uniform_index(181);  // 20..200 scores
    double gap = rng.uniform(0.3, 1.5), noise = rng.uniform(0.4, 1.2);
    double p_pos = 0.5;
    if (trial % 4 == 0) {  // near-separable
      gap = 3.0;
      noise = 0.2;
    } else if (trial % 4 == 1) {  // unbalanced classes
      p_pos = 0.15;
    }

    std::vector<double> scores(n);
    std::vector<std::int8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool pos = rng.uniform() < p_pos;
      labels[i] = pos ? +1 : -1;
      scores[i] = (pos ? gap : -gap) + noise * rng.normal();
    }
    labels[0] = +1;
    labels[1] = -1;

    const auto [a, b] = vad::fit_platt(scores, labels);
    const auto [oa, ob] = oracle::platt_grid_fit(scores, labels);
    const double diff = std::fabs(oracle::platt_nll(scores, labels, a, b) -
                                  oracle::platt_nll(scores, labels, oa, ob));
    worst = std::max(worst, diff);
    if (diff > kNllTol)
      return {false, fmt("nll gap %.3g on trial %g", diff,
                         static_cast<double>(trial))};
  }
  return {true, fmt("20 score sets, worst nll gap %.2g", worst)};
}

// --- criterion 4: trapezoid AUC equals the pairwise statistic under ties ---

Outcome auc_matches_pairwise() {
  constexpr double kTol = 1e-9;
  constexpr int kTrials = 100;

  vad::Rng rng(0xacc4);
  double worst = 0.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(296);
    const std::size_t levels = 2 + rng.uniform_index(11);  // heavy ties
    std::vector<double> scores(n);
    std::vector<std::int8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.uniform_index(levels)) /
                  static_cast<double>(levels);
      labels[i] = rng.uniform() < 0.5 ? +1 : -1;
    }
    labels[0] = +1;
    labels[1] = -1;

    const double gap = std::fabs(vad::roc_auc(scores, labels).auc -
                                 oracle::pairwise_auc(scores, labels));
    worst = std::max(worst, gap);
    if (gap > kTol)
      return {false, fmt("auc gap %.3g on trial %g", gap,
                         static_cast<double>(trial))};
  }
  return {true, fmt("100 score sets, worst auc gap %.2g", worst)};
}

// --- criterion 5: MLP gradients match central finite differences ---

Outcome mlp_gradients_check() {
  constexpr double kTol = 1e-4;

  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    vad::MlpConfig cfg;  // the baseline architecture, 13 -> 12 -> 8 -> 1
    cfg.init_range = 0.5;
    cfg.seed = 1000 + seed;
    const vad::MlpModel model = vad::init_mlp(cfg);

    vad::Rng rng(seed * 7919);
    std::vector<std::vector<double>> xs;
    std::vector<double> targets;
    while (xs.size() < 8) {
      std::vector<double> x(13);
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      if (oracle::min_hidden_preactivation(model, x) < 1e-3) continue;
      xs.push_back(std::move(x));
      targets.push_back(rng.uniform() < 0.5 ? 0.0 : 1.0);
    }
    const double err = oracle::max_grad_rel_error(model, xs, targets);
    worst = std::max(worst, err);
    if (err >= kTol)
      return {false, fmt("relative error %.3g at seed %g", err,
                         static_cast<double>(seed))};
  }
  return {true, fmt("10 seeds, worst relative error %.2g", worst)};
}

// --- criteria 6 and 7: ensemble trend and stability on the synthetic corpus ---

struct TrendData {
  bool ok = false;
  std::string error;
  bool premise = true;  // >= 3000 frames per class after gating
  std::vector<double> acc1, acc5, acc6;
  std::vector<double> members5;     // pooled member accuracies at n = 5
  std::vector<double> max_member5;  // per-seed maximum member accuracy
  double seconds = 0.0;
};

TrendData run_trend_protocol() {
  TrendData out;
  const auto start = std::chrono::steady_clock::now();

  vad::SvmHyperparams fixed;  // shared by members and the output layer
  fixed.c = 2.0;
  fixed.gamma = 2.0;

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    vad::SynthSpec spec;
    spec.n_speech = 25;
    spec.n_noise = 25;
    spec.clip_seconds = 2.0;
    spec.seed = seed;
    const vad::SynthCorpus corpus = vad::generate_corpus(spec);
    const vad::ExtractResult res =
        vad::extract_clips(corpus.clips, corpus.labels, vad::ExtractOptions{});

    if (res.data.count_label(+1) < 3000 || res.data.count_label(-1) < 3000)
      out.premise = false;

    // Frame-level 80/20 holdout, then fixed-size training portions: an
    // n-member ensemble consumes n+1 of the 7 portions, so member training
    // sets have the same size at every width.
    std::vector<std::size_t> order(res.data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    vad::Rng rng(vad::derive_seed(seed, 0xacc, 6));
    rng.shuffle(order);
    const std::size_t n_test = res.data.rows() / 5;
    const std::size_t n_train = res.data.rows() - n_test;

    vad::Dataset train, test;
    train.dim = test.dim = res.data.dim;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t i = order[k];
      (k < n_train ? train : test).push_row(res.data.row(i), res.data.labels[i]);
    }
    const std::size_t portion = train.rows() / 7;

    for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{6}}) {
      vad::Dataset slice;
      slice.dim = train.dim;
      for (std::size_t k = 0; k < portion * (n + 1); ++k)
        slice.push_row(train.row(k), train.labels[k]);

      vad::EnsembleConfig cfg;
      cfg.n_members = n;
      cfg.member_hp = fixed;
      cfg.meta_hp = fixed;
      cfg.seed = seed;
      const vad::EnsembleModel ens = vad::train_ensemble(slice, cfg);

      std::size_t correct = 0;
      std::vector<std::size_t> member_correct(n, 0);
      for (std::size_t i = 0; i < test.rows(); ++i) {
        const auto row = test.row(i);
        if (vad::predict(ens, row).label == test.labels[i]) ++correct;
        if (n == 5) {
          for (std::size_t m = 0; m < n; ++m) {
            const int pred =
                vad::predict_prob(ens.members[m], row) >= 0.5 ? +1 : -1;
            if (pred == test.labels[i]) ++member_correct[m];
          }
        }
      }
      const double acc =
          static_cast<double>(correct) / static_cast<double>(test.rows());
      if (n == 1) out.acc1.push_back(acc);
      if (n == 6) out.acc6.push_back(acc);
      if (n == 5) {
        out.acc5.push_back(acc);
        double best = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
          const double macc = static_cast<double>(member_correct[m]) /
                              static_cast<double>(test.rows());
          out.members5.push_back(macc);
          best = std::max(best, macc);
        }
        out.max_member5.push_back(best);
      }
    }
  }

  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  out.ok = true;
  return out;
}

Outcome ensemble_trend(const TrendData& td) {
  constexpr double kSaturationBand = 0.02;  // "within 2 points" at n = 6
  constexpr double kBudgetSeconds = 600.0;

  if (!td.ok) return {false, td.error};
  if (!td.premise) return {false, "corpus fell short of 3000 frames per class"};
  const double m1 = vad::mean(td.acc1);
  const double m5 = vad::mean(td.acc5);
  const double m6 = vad::mean(td.acc6);
  const bool grows = m5 > m1;
  const bool saturates = m5 >= m6 - kSaturationBand;
  const bool in_budget = td.seconds < kBudgetSeconds;
  std::string detail = fmt("mean accuracy n=1 %.4f, n=5 %.4f, n=6 %.4f", m1, m5, m6);
  if (!in_budget) detail += fmt("; over budget at %.0fs", td.seconds);
  return {grows && saturates && in_budget, detail};
}

Outcome ensemble_stability(const TrendData& td) {
  constexpr double kMarginBand = 0.02;  // "close to the maximum member"

  if (!td.ok) return {false, td.error};
  const double ens_std = vad::stddev(td.acc5);
  const double member_std = vad::stddev(td.members5);
  bool close_everywhere = true;
  double worst_margin = 1.0;
  for (std::size_t s = 0; s < td.acc5.size(); ++s) {
    const double margin = td.acc5[s] - (td.max_member5[s] - kMarginBand);
    worst_margin = std::min(worst_margin, td.acc5[s] - td.max_member5[s]);
    if (margin < 0.0) close_everywhere = false;
  }
  const bool steadier = ens_std < member_std;
  return {steadier && close_everywhere,
          fmt("std ensemble %.4f vs members %.4f; worst margin %+.4f", ens_std,
              member_std, worst_margin)};
}

// --- criteria 8 and 10: pipeline checks through the CLI binary ---

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(VADKIT_BIN) + " " + args + " >> " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "vad_acceptance" / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";

  const std::string manifest = (dir / "corpus" / "manifest.csv").string();
  if (run_cli("synth --out " + (dir / "corpus").string() +
                  " --n-speech 8 --n-noise 8 --seconds 1.5 --seed 21",
              log) != 0)
    return {false, "synth failed"};

  auto extract_to = [&](const std::string& name, int jobs) {
    return run_cli("extract --manifest " + manifest + " --out " +
                       (dir / name).string() + " --seed 21 --jobs " +
                       std::to_string(jobs),
                   log);
  };
  if (extract_to("f1.vadf", 1) != 0) return {false, "extract failed"};
  if (extract_to("f2.vadf", 3) != 0) return {false, "parallel extract failed"};
  if (slurp(dir / "f1.vadf") != slurp(dir / "f2.vadf"))
    return {false, "features differ across worker counts"};

  {
    std::ofstream cfg(dir / "train.cfg");
    cfg << "member_c = 2\nmember_gamma = 2\nmeta_c = 2\nmeta_gamma = 2\n"
        << "n_members = 2\n";
  }
  auto train_to = [&](const std::string& name, int jobs) {
    return run_cli("train --features " + (dir / "f1.vadf").string() +
                       " --kind ensemble --config " + (dir / "train.cfg").string() +
                       " --seed 21 --jobs " + std::to_string(jobs) + " --out " +
                       (dir / name).string(),
                   log);
  };
  if (train_to("m1.json", 1) != 0) return {false, "train failed"};
  if (train_to("m2.json", 2) != 0) return {false, "parallel train failed"};
  if (slurp(dir / "m1.json") != slurp(dir / "m2.json"))
    return {false, "models differ across worker counts"};

  auto eval_to = [&](const std::string& report, const std::string& roc) {
    return run_cli("eval --model " + (dir / "m1.json").string() + " --features " +
                       (dir / "f1.vadf").string() + " --report " +
                       (dir / report).string() + " --roc " + (dir / roc).string(),
                   log);
  };
  if (eval_to("r1.json", "roc1.csv") != 0) return {false, "eval failed"};
  if (eval_to("r2.json", "roc2.csv") != 0) return {false, "repeat eval failed"};
  if (slurp(dir / "r1.json") != slurp(dir / "r2.json"))
    return {false, "reports differ across reruns"};
  if (slurp(dir / "roc1.csv") != slurp(dir / "roc2.csv"))
    return {false, "roc curves differ across reruns"};

  // Full rerun of the chain reproduces every artifact byte for byte.
  if (extract_to("f3.vadf", 2) != 0) return {false, "rerun extract failed"};
  if (slurp(dir / "f1.vadf") != slurp(dir / "f3.vadf"))
    return {false, "features differ across reruns"};
  if (train_to("m3.json", 1) != 0) return {false, "rerun train failed"};
  if (slurp(dir / "m1.json") != slurp(dir / "m3.json"))
    return {false, "models differ across reruns"};

  return {true, "features, model, report, and roc identical across reruns"};
}

// --- criterion 9: framing and MFCC properties ---

Outcome framing_mfcc_properties() {
  // Frame-count formula against the actual framer on randomized inputs.
  vad::Rng rng(0xacc9);
  for (int trial = 0; trial < 200; ++trial) {
    const int rate = 8000 + static_cast<int>(rng.uniform_index(8001));
    vad::FrameSpec spec;
    spec.frame_ms = rng.uniform(5.0, 40.0);
    spec.overlap_ms = spec.frame_ms * rng.uniform(0.0, 0.9);
    const std::size_t frame = static_cast<std::size_t>(spec.frame_len(rate));
    const std::size_t hop = static_cast<std::size_t>(spec.hop_len(rate));
    const std::size_t n = rng.uniform_index(5 * frame + 1);

    const std::size_t expected = n < frame ? 0 : 1 + (n - frame) / hop;
    if (vad::expected_frame_count(n, rate, spec) != expected)
      return {false, "frame-count formula mismatch"};
    vad::AudioClip clip;
    clip.sample_rate_hz = rate;
    clip.samples.assign(n, 0.1);
    if (vad::frame_clip(clip, spec).size() != expected)
      return {false, "framer disagrees with the frame-count formula"};
  }

  // DCT orthonormality and truncation consistency.
  const auto square = vad::dsp::dct2_matrix(26, 26);
  for (int i = 0; i < 26; ++i) {
    for (int j = 0; j < 26; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 26; ++k) dot += square[i][k] * square[j][k];
      if (std::fabs(dot - (i == j ? 1.0 : 0.0)) > 1e-9)
        return {false, "dct rows are not orthonormal"};
    }
  }
  const auto truncated = vad::dsp::dct2_matrix(13, 26);
  for (int i = 0; i < 13; ++i)
    for (int k = 0; k < 26; ++k)
      if (std::fabs(truncated[i][k] - square[i][k]) > 1e-12)
        return {false, "truncated dct differs from the square matrix"};

  // Sign-flip invariance and the gain-shift law on a loud frame.
  vad::MfccExtractor extractor(16000, 400, vad::MfccConfig{});
  std::vector<double> frame(400);
  for (std::size_t i = 0; i < frame.size(); ++i)
    frame[i] = 0.3 * std::sin(2.0 * M_PI * 440.0 * static_cast<double>(i) / 16000.0) +
               0.05 * rng.normal();

  std::vector<double> flipped(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) flipped[i] = -frame[i];
  const auto base = extractor.compute(frame);
  const auto flip = extractor.compute(flipped);
  for (std::size_t i = 0; i < base.size(); ++i)
    if (std::fabs(base[i] - flip[i]) > 1e-12)
      return {false, "sign flip changed the coefficients"};

  const double gain = 3.7;
  std::vector<double> louder(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) louder[i] = gain * frame[i];
  const auto loud = extractor.compute(louder);
  const double expected_shift = 2.0 * std::log(gain) * std::sqrt(26.0);
  if (std::fabs((loud[0] - base[0]) - expected_shift) > 1e-6)
    return {false, fmt("coeff 0 shifted by %.6f, expected %.6f",
                       loud[0] - base[0], expected_shift)};
  for (std::size_t i = 1; i < base.size(); ++i)
    if (std::fabs(loud[i] - base[i]) > 1e-6)
      return {false, "gain leaked into higher coefficients"};

  return {true, "frame counts, dct orthonormality, sign flip, gain shift"};
}

Outcome cli_smoke() {
  constexpr double kBudgetSeconds = 300.0;
  constexpr double kAccuracyFloor = 0.80;

  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "vad_acceptance" / "smoke";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";

  if (run_cli("synth --out " + (dir / "corpus").string() +
                  " --n-speech 10 --n-noise 10 --seconds 2 --seed 42",
              log) != 0)
    return {false, "synth failed"};
  if (run_cli("extract --manifest " + (dir / "corpus" / "manifest.csv").string() +
                  " --out " + (dir / "f.vadf").string() + " --seed 42",
              log) != 0)
    return {false, "extract failed"};

  // Grid-searched five-member ensemble scored on the internal 20% holdout.
  if (run_cli("sweep --features " + (dir / "f.vadf").string() + " --out " +
                  (dir / "sweep.csv").string() + " --n-members 5 --seed 42",
              log) != 0)
    return {false, "sweep failed"};

  double holdout_acc = -1.0;
  std::istringstream lines(slurp(dir / "sweep.csv"));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("5,", 0) == 0) {
      holdout_acc = std::stod(line.substr(2));
      break;
    }
  }
  if (holdout_acc < 0.0) return {false, "sweep csv is missing the n=5 row"};

  if (run_cli("train --features " + (dir / "f.vadf").string() +
                  " --kind ensemble --n-members 5 --seed 42 --out " +
                  (dir / "model.json").string(),
              log) != 0)
    return {false, "train failed"};
  if (run_cli("eval --model " + (dir / "model.json").string() + " --features " +
                  (dir / "f.vadf").string() + " --report " +
                  (dir / "report.json").string(),
              log) != 0)
    return {false, "eval failed"};

  nlohmann::json report, model;
  try {
    report = nlohmann::json::parse(slurp(dir / "report.json"));
    model = nlohmann::json::parse(slurp(dir / "model.json"));
  } catch (const nlohmann::json::exception&) {
    return {false, "artifacts are not valid json"};
  }
  if (model.value("kind", "") != "ensemble" || !report.contains("scored_only"))
    return {false, "artifacts are missing expected fields"};

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::string detail = fmt("holdout accuracy %.4f in %.0fs", holdout_acc, seconds);
  return {holdout_acc > kAccuracyFloor && seconds < kBudgetSeconds, detail};
}

}  // namespace

int main() {
  struct Row {
    int number;
    const char* name;
    Outcome outcome;
    double seconds;
  };
  std::vector<Row> rows;

  auto timed = [&](int number, const char* name, auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    rows.push_back({number, name, outcome, seconds});
    std::printf("criterion %d (%s): %s (%s; %.1fs)\n", number, name,
                outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  };

  timed(1, "smo matches the qp oracle", smo_matches_qp_oracle);
  timed(2, "kkt bands hold on converged models", kkt_bands_hold);
  timed(3, "platt fit matches the grid oracle", platt_matches_grid);
  timed(4, "trapezoid auc equals the pairwise statistic", auc_matches_pairwise);
  timed(5, "mlp gradients match finite differences", mlp_gradients_check);

  TrendData trend;
  timed(6, "ensemble accuracy grows then saturates", [&] {
    trend = run_trend_protocol();
    return ensemble_trend(trend);
  });
  timed(7, "ensemble is steadier than its members",
        [&] { return ensemble_stability(trend); });

  timed(8, "seeded pipeline is byte-for-byte deterministic", cli_determinism);
  timed(9, "framing and mfcc properties", framing_mfcc_properties);
  timed(10, "end-to-end smoke beats the accuracy floor", cli_smoke);

  int failures = 0;
  for (const Row& row : rows)
    if (!row.outcome.pass) ++failures;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(rows.size()) - failures,
              rows.size());
  return failures;
}
