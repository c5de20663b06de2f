#include "vad/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vad/error.hpp"
#include "vad/util.hpp"

namespace vad {

namespace {

void validate_config(const MlpConfig& cfg) {
  if (cfg.layer_sizes.size() < 2)
    fail(ErrorKind::InvalidConfig, "need at least input and output layers");
  for (std::size_t s : cfg.layer_sizes)
    if (s == 0) fail(ErrorKind::InvalidConfig, "layer sizes must be positive");
  if (cfg.layer_sizes.back() != 1)
    fail(ErrorKind::InvalidConfig, "output layer must have one unit");
  if (cfg.learning_rate <= 0.0)
    fail(ErrorKind::InvalidConfig, "learning rate must be positive");
  if (cfg.batch_size == 0)
    fail(ErrorKind::InvalidConfig, "batch size must be positive");
  if (cfg.validation_split < 0.0 || cfg.validation_split >= 1.0)
    fail(ErrorKind::InvalidConfig, "validation split must lie in [0,1)");
  if (cfg.init_range < 0.0)
    fail(ErrorKind::InvalidConfig, "init range must be non-negative");
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Pre-activations and activations for one input, in network space.
struct ForwardPass {
  std::vector<std::vector<double>> z;  // z[l], l = 1..L
  std::vector<std::vector<double>> a;  // a[0] = input, relu(z) for hidden
};

ForwardPass run_forward(const MlpModel& model, std::span<const double> x) {
  const auto& sizes = model.config.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  ForwardPass fp;
  fp.a.resize(n_layers + 1);
  fp.z.resize(n_layers + 1);
  fp.a[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t n_in = sizes[l];
    const std::size_t n_out = sizes[l + 1];
    fp.z[l + 1].resize(n_out);
    for (std::size_t r = 0; r < n_out; ++r) {
      double acc = model.biases[l][r];
      const double* w = model.weights[l].data() + r * n_in;
      for (std::size_t k = 0; k < n_in; ++k) acc += w[k] * fp.a[l][k];
      fp.z[l + 1][r] = acc;
    }
    if (l + 1 < n_layers) {
      fp.a[l + 1].resize(n_out);
      for (std::size_t r = 0; r < n_out; ++r)
        fp.a[l + 1][r] = std::max(0.0, fp.z[l + 1][r]);
    } else {
      fp.a[l + 1] = fp.z[l + 1];  // sigmoid applied by the caller
    }
  }
  return fp;
}

double logit(const MlpModel& model, std::span<const double> x) {
  return run_forward(model, x).z.back()[0];
}

}  // namespace

MlpModel init_mlp(const MlpConfig& cfg) {
  validate_config(cfg);
  MlpModel model;
  model.config = cfg;
  Rng rng(cfg.seed);
  const std::size_t n_layers = cfg.layer_sizes.size() - 1;
  model.weights.resize(n_layers);
  model.biases.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t n_in = cfg.layer_sizes[l];
    const std::size_t n_out = cfg.layer_sizes[l + 1];
    model.weights[l].resize(n_out * n_in);
    for (double& w : model.weights[l])
      w = rng.uniform(-cfg.init_range, cfg.init_range);
    model.biases[l].resize(n_out);
    for (double& b : model.biases[l])
      b = rng.uniform(-cfg.init_range, cfg.init_range);
  }
  return model;
}

double forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.config.layer_sizes.front())
    fail(ErrorKind::DimensionMismatch, "input width does not match the model");
  double z;
  if (model.scaler) {
    const std::vector<double> scaled = standardize_apply(*model.scaler, x);
    z = logit(model, scaled);
  } else {
    z = logit(model, x);
  }
  return sigmoid_prob(z, -1.0, 0.0);
}

int predict_label(const MlpModel& model, std::span<const double> x) {
  return forward(model, x) >= 0.5 ? +1 : -1;
}

MlpGradients mlp_loss_and_gradients(const MlpModel& model,
                                    const std::vector<std::vector<double>>& xs,
                                    const std::vector<double>& targets) {
  if (xs.empty()) fail(ErrorKind::EmptyDataset, "gradient batch is empty");
  if (xs.size() != targets.size())
    fail(ErrorKind::LengthMismatch, "inputs and targets differ in length");

  const auto& sizes = model.config.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  MlpGradients g;
  g.d_weights.resize(n_layers);
  g.d_biases.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    g.d_weights[l].assign(model.weights[l].size(), 0.0);
    g.d_biases[l].assign(model.biases[l].size(), 0.0);
  }

  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t s = 0; s < xs.size(); ++s) {
    if (xs[s].size() != sizes.front())
      fail(ErrorKind::DimensionMismatch, "input width does not match the model");
    const double t = targets[s];
    ForwardPass fp = run_forward(model, xs[s]);
    const double z_out = fp.z.back()[0];
    g.loss += (softplus(z_out) - t * z_out) * inv_n;

    // delta[l] = dL_mean / dz[l]; output layer first.
    const double p = sigmoid_prob(z_out, -1.0, 0.0);
    std::vector<double> delta{(p - t) * inv_n};
    for (std::size_t l = n_layers; l-- > 0;) {
      const std::size_t n_in = sizes[l];
      const std::size_t n_out = sizes[l + 1];
      for (std::size_t r = 0; r < n_out; ++r) {
        g.d_biases[l][r] += delta[r];
        double* dw = g.d_weights[l].data() + r * n_in;
        for (std::size_t k = 0; k < n_in; ++k) dw[k] += delta[r] * fp.a[l][k];
      }
      if (l == 0) break;
      std::vector<double> prev(n_in, 0.0);
      for (std::size_t k = 0; k < n_in; ++k) {
        if (fp.z[l][k] <= 0.0) continue;  // relu gate
        double acc = 0.0;
        const double* w = model.weights[l].data();
        for (std::size_t r = 0; r < n_out; ++r) acc += w[r * n_in + k] * delta[r];
        prev[k] = acc;
      }
      delta = std::move(prev);
    }
  }
  return g;
}

MlpModel train_mlp(const Dataset& data, const MlpConfig& cfg) {
  validate_config(cfg);
  if (data.rows() == 0) fail(ErrorKind::EmptyDataset, "cannot train on empty dataset");
  if (data.dim != cfg.layer_sizes.front())
    fail(ErrorKind::DimensionMismatch, "dataset width does not match layer sizes");

  MlpModel model = init_mlp(cfg);
  if (cfg.standardize) model.scaler = standardize_fit(data);

  const std::size_t n = data.rows();
  std::vector<std::vector<double>> inputs(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (model.scaler)
      inputs[i] = standardize_apply(*model.scaler, data.row(i));
    else
      inputs[i].assign(data.row(i).begin(), data.row(i).end());
    targets[i] = data.labels[i] > 0 ? 1.0 : 0.0;
  }

  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);  // distinct from the init stream
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const std::size_t n_val =
      static_cast<std::size_t>(std::floor(cfg.validation_split * static_cast<double>(n)));
  std::vector<std::size_t> train_idx(order.begin(),
                                     order.end() - static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(n_val),
                                   order.end());

  // Adam state, one slot per parameter.
  const std::size_t n_layers = cfg.layer_sizes.size() - 1;
  std::vector<std::vector<double>> mw(n_layers), vw(n_layers), mb(n_layers), vb(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    mw[l].assign(model.weights[l].size(), 0.0);
    vw[l].assign(model.weights[l].size(), 0.0);
    mb[l].assign(model.biases[l].size(), 0.0);
    vb[l].assign(model.biases[l].size(), 0.0);
  }
  double step = 0.0;
  auto adam_update = [&](std::vector<double>& w, const std::vector<double>& grad,
                         std::vector<double>& m, std::vector<double>& v) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, step);
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  };

  auto evaluate = [&](const std::vector<std::size_t>& idx, double& loss, double& acc) {
    loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t i : idx) {
      const double z = logit(model, inputs[i]);
      loss += softplus(z) - targets[i] * z;
      const double p = sigmoid_prob(z, -1.0, 0.0);
      if ((p >= 0.5) == (targets[i] == 1.0)) ++correct;
    }
    loss /= static_cast<double>(idx.size());
    acc = static_cast<double>(correct) / static_cast<double>(idx.size());
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_idx);
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, train_idx.size());
      std::vector<std::vector<double>> bx;
      std::vector<double> bt;
      bx.reserve(end - start);
      bt.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(inputs[train_idx[k]]);
        bt.push_back(targets[train_idx[k]]);
      }
      MlpGradients grads = mlp_loss_and_gradients(model, bx, bt);
      step += 1.0;
      for (std::size_t l = 0; l < n_layers; ++l) {
        adam_update(model.weights[l], grads.d_weights[l], mw[l], vw[l]);
        adam_update(model.biases[l], grads.d_biases[l], mb[l], vb[l]);
      }
    }
    double loss, acc;
    evaluate(train_idx, loss, acc);
    model.history.train_loss.push_back(loss);
    model.history.train_accuracy.push_back(acc);
    if (!val_idx.empty()) {
      evaluate(val_idx, loss, acc);
      model.history.val_loss.push_back(loss);
      model.history.val_accuracy.push_back(acc);
    }
  }
  return model;
}

nlohmann::json mlp_to_json(const MlpModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["layer_sizes"] = model.config.layer_sizes;
  const auto& sizes = model.config.layer_sizes;
  auto weights = nlohmann::json::array();
  auto biases = nlohmann::json::array();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < sizes[l + 1]; ++r) {
      const double* w = model.weights[l].data() + r * sizes[l];
      rows.push_back(std::vector<double>(w, w + sizes[l]));
    }
    weights.push_back(std::move(rows));
    biases.push_back(model.biases[l]);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  j["config"] = {{"learning_rate", model.config.learning_rate},
                 {"beta1", model.config.beta1},
                 {"beta2", model.config.beta2},
                 {"epsilon", model.config.epsilon},
                 {"epochs", model.config.epochs},
                 {"batch_size", model.config.batch_size},
                 {"validation_split", model.config.validation_split},
                 {"init_range", model.config.init_range},
                 {"standardize", model.config.standardize},
                 {"seed", model.config.seed}};
  j["history"] = {{"train_loss", model.history.train_loss},
                  {"train_accuracy", model.history.train_accuracy},
                  {"val_loss", model.history.val_loss},
                  {"val_accuracy", model.history.val_accuracy}};
  if (model.scaler)
    j["scaler"] = {{"means", model.scaler->means}, {"stds", model.scaler->stds}};
  else
    j["scaler"] = nullptr;
  return j;
}

MlpModel mlp_from_json(const nlohmann::json& j) {
  MlpModel model;
  model.config.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  const auto& cfg = j.at("config");
  model.config.learning_rate = cfg.value("learning_rate", 0.001);
  model.config.beta1 = cfg.value("beta1", 0.9);
  model.config.beta2 = cfg.value("beta2", 0.999);
  model.config.epsilon = cfg.value("epsilon", 1e-8);
  model.config.epochs = cfg.value("epochs", std::size_t{100});
  model.config.batch_size = cfg.value("batch_size", std::size_t{100});
  model.config.validation_split = cfg.value("validation_split", 0.2);
  model.config.init_range = cfg.value("init_range", 0.05);
  model.config.standardize = cfg.value("standardize", true);
  model.config.seed = cfg.value("seed", std::uint64_t{0});

  const auto& sizes = model.config.layer_sizes;
  if (sizes.size() < 2) fail(ErrorKind::MalformedHeader, "bad layer sizes");
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1)
    fail(ErrorKind::MalformedHeader, "layer count mismatch");
  model.weights.resize(sizes.size() - 1);
  model.biases.resize(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto& rows = weights[l];
    if (rows.size() != sizes[l + 1])
      fail(ErrorKind::MalformedHeader, "weight row count mismatch");
    model.weights[l].reserve(sizes[l + 1] * sizes[l]);
    for (const auto& row : rows) {
      auto v = row.get<std::vector<double>>();
      if (v.size() != sizes[l])
        fail(ErrorKind::MalformedHeader, "weight row width mismatch");
      model.weights[l].insert(model.weights[l].end(), v.begin(), v.end());
    }
    model.biases[l] = biases[l].get<std::vector<double>>();
    if (model.biases[l].size() != sizes[l + 1])
      fail(ErrorKind::MalformedHeader, "bias width mismatch");
  }
  if (j.contains("history")) {
    const auto& h = j["history"];
    model.history.train_loss = h.value("train_loss", std::vector<double>{});
    model.history.train_accuracy = h.value("train_accuracy", std::vector<double>{});
    model.history.val_loss = h.value("val_loss", std::vector<double>{});
    model.history.val_accuracy = h.value("val_accuracy", std::vector<double>{});
  }
  if (j.contains("scaler") && !j["scaler"].is_null()) {
    Scaler s;
    s.means = j["scaler"].at("means").get<std::vector<double>>();
    s.stds = j["scaler"].at("stds").get<std::vector<double>>();
    model.scaler = std::move(s);
  }
  return model;
}

}  // namespace vad
