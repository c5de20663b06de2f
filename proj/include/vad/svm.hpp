#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vad/dataset.hpp"

namespace vad {

struct SvmHyperparams {
  double c = 1.0;
  double gamma = 0.5;
  double tol = 1e-3;              // KKT / stopping tolerance
  std::size_t max_iter = 2000000; // pair-update safety cap
  std::size_t cache_rows = 512;   // kernel row cache capacity
};

// Per-dimension standardization statistics. Dimensions with zero variance
// get std = 1 so constant features map to 0.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;
};

Scaler standardize_fit(const Dataset& data);
std::vector<double> standardize_apply(const Scaler& scaler,
                                      std::span<const double> row);

// K(x, y) = exp(-gamma * ||x - y||^2)
double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double gamma);

struct SvmModel {
  SvmHyperparams hp;
  Scaler scaler;
  std::size_t dim = 0;
  std::vector<double> support_vectors;  // row-major, standardized space
  std::vector<double> dual_coeffs;      // alpha_i * y_i per support vector
  double bias = 0.0;
  double platt_a = 0.0;
  double platt_b = 0.0;
  bool converged = true;
  std::size_t iterations = 0;

  std::size_t n_support() const {
    return dim == 0 ? 0 : support_vectors.size() / dim;
  }
  std::span<const double> support_vector(std::size_t i) const {
    return {support_vectors.data() + i * dim, dim};
  }
};

// Optional instrumentation: the dual objective after every pair update.
struct SmoTrace {
  std::vector<double> objective;
};

// Extra training outputs used by diagnostics and calibration.
struct SvmTrainResult {
  SvmModel model;
  std::vector<double> alpha;            // per training row
  std::vector<double> train_decisions;  // f(x_i) including bias
};

// Trains a soft-margin RBF SVM by sequential minimal optimization with
// maximal-violating-pair selection, then fits the probability sigmoid on the
// training decision values. Standardization is fit on the training rows and
// baked into the model. A model that hits max_iter is returned with
// converged = false.
SvmTrainResult train_svm_detailed(const Dataset& data, const SvmHyperparams& hp,
                                  SmoTrace* trace = nullptr);
SvmModel train_svm(const Dataset& data, const SvmHyperparams& hp,
                   SmoTrace* trace = nullptr);

// f(x) = sum_i dual_i K(sv_i, x~) + b on the standardized input x~.
double decision(const SvmModel& model, std::span<const double> x);

// Sigmoid parameters (A, B) for P(y=+1 | f) = 1 / (1 + exp(A f + B)),
// fitted by Newton's method with backtracking on prior-corrected targets.
std::pair<double, double> fit_platt(const std::vector<double>& scores,
                                    const std::vector<std::int8_t>& labels);

double sigmoid_prob(double score, double a, double b);

// Platt probability of the speech class, strictly inside (0, 1).
double predict_prob(const SvmModel& model, std::span<const double> x);

struct GridSpec {
  std::vector<double> c_values;      // default 2^-5, 2^-3, ..., 2^15
  std::vector<double> gamma_values;  // default 2^-15, 2^-13, ..., 2^3
  int folds = 2;
};

GridSpec default_grid();

struct GridResult {
  SvmHyperparams best;
  double cv_accuracy = 0.0;
};

// Exhaustive (C, gamma) selection by seeded stratified k-fold accuracy.
// Folds are identical across grid cells; ties prefer smaller C, then
// smaller gamma. Cells may be evaluated in parallel.
GridResult grid_search(const Dataset& data, const GridSpec& grid,
                       std::uint64_t seed, const SvmHyperparams& base = {},
                       int jobs = 1);

nlohmann::json svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const nlohmann::json& j);

}  // namespace vad
