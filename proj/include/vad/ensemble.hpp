#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "vad/dataset.hpp"
#include "vad/svm.hpp"

namespace vad {

// Two-layer stacked SVM: n base members trained on disjoint partitions, plus
// an output-layer SVM over the members' speech probabilities.
struct EnsembleConfig {
  std::size_t n_members = 5;
  // Hyperparameter source for the base members. With neither field set, one
  // grid search runs on the first partition and its result is shared by all
  // members. per_member_grid runs a separate search per member instead.
  std::optional<SvmHyperparams> member_hp;
  bool per_member_grid = false;
  // Meta layer: fixed hyperparameters, or a grid search on the stacked
  // probability features when unset.
  std::optional<SvmHyperparams> meta_hp;
  GridSpec grid = default_grid();
  SvmHyperparams base;  // tol / max_iter / cache defaults shared by all fits
  std::uint64_t seed = 0;
  int jobs = 1;

  std::size_t n_partitions() const { return n_members + 1; }
};

struct EnsembleModel {
  std::vector<SvmModel> members;
  SvmModel meta;  // input dimension = members.size()
  EnsembleConfig config;
};

struct EnsemblePrediction {
  double prob = 0.0;
  int label = 0;  // +1 speech, -1 non-speech
};

// Seeded uniform shuffle followed by a contiguous split into n_parts pieces.
// Sizes differ by at most one with earlier parts taking the remainder; the
// parts are disjoint and cover the input. Every part must keep both classes.
std::vector<Dataset> partition(const Dataset& data, std::size_t n_parts,
                               std::uint64_t seed);

// Member i is trained on part i; the held-out final part provides the meta
// training rows (one n-dimensional probability vector per row). Per-member
// seeds are seed XOR member index, the meta seed is seed XOR n_members, so
// results do not depend on the training schedule.
EnsembleModel train_ensemble(const Dataset& data, const EnsembleConfig& cfg);

// Probability of the speech class from each member, in member order.
std::vector<double> meta_features(const std::vector<SvmModel>& members,
                                  std::span<const double> x);

// Label is +1 exactly when the meta probability is >= 0.5.
EnsemblePrediction predict(const EnsembleModel& ens, std::span<const double> x);

nlohmann::json ensemble_to_json(const EnsembleModel& ens);
EnsembleModel ensemble_from_json(const nlohmann::json& j);

}  // namespace vad
