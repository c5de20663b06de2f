#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "vad/dataset.hpp"
#include "vad/svm.hpp"

namespace vad {

// Feedforward baseline: 13 -> 12 -> 8 -> 1, relu hidden layers, sigmoid
// output, binary cross-entropy loss, Adam updates.
struct MlpConfig {
  std::vector<std::size_t> layer_sizes = {13, 12, 8, 1};
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  double validation_split = 0.2;  // last fraction after the seeded shuffle
  double init_range = 0.05;       // parameters start in (-init_range, +init_range)
  bool standardize = true;        // same scaler policy as the SVM path
  std::uint64_t seed = 0;
};

struct MlpHistory {
  std::vector<double> train_loss;
  std::vector<double> train_accuracy;
  std::vector<double> val_loss;      // empty when the split holds out no rows
  std::vector<double> val_accuracy;
};

struct MlpModel {
  MlpConfig config;
  // weights[l] is row-major (layer_sizes[l+1] x layer_sizes[l]).
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::optional<Scaler> scaler;
  MlpHistory history;
};

// Fresh model with every parameter drawn uniformly from the init range.
MlpModel init_mlp(const MlpConfig& cfg);

// Sigmoid output in (0,1). Applies the baked-in scaler when present.
double forward(const MlpModel& model, std::span<const double> x);

// +1 exactly when forward(x) >= 0.5.
int predict_label(const MlpModel& model, std::span<const double> x);

// Labels map +1 -> target 1 and -1 -> target 0. The last validation_split
// fraction of a seeded shuffle is held out for per-epoch metrics; batches of
// batch_size follow the reshuffled training order each epoch and the final
// short batch is kept. Training is single-threaded so a fixed seed gives
// identical weights everywhere. Zero epochs returns the initialization.
MlpModel train_mlp(const Dataset& data, const MlpConfig& cfg);

// Mean batch loss and analytic parameter gradients, exposed so the gradients
// can be compared against finite differences. Inputs are fed to the network
// as given; the model's scaler is not applied.
struct MlpGradients {
  double loss = 0.0;
  std::vector<std::vector<double>> d_weights;
  std::vector<std::vector<double>> d_biases;
};
MlpGradients mlp_loss_and_gradients(const MlpModel& model,
                                    const std::vector<std::vector<double>>& xs,
                                    const std::vector<double>& targets);

nlohmann::json mlp_to_json(const MlpModel& model);
MlpModel mlp_from_json(const nlohmann::json& j);

}  // namespace vad
