#include "vad/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "vad/error.hpp"
#include "vad/util.hpp"

namespace vad {

namespace {

void validate_hp(const SvmHyperparams& hp) {
  if (hp.c <= 0.0) fail(ErrorKind::InvalidConfig, "C must be positive");
  if (hp.gamma <= 0.0) fail(ErrorKind::InvalidConfig, "gamma must be positive");
  if (hp.tol <= 0.0) fail(ErrorKind::InvalidConfig, "tol must be positive");
}

// LRU cache of Q rows, Q[i][t] = y_i y_t K(x_i, x_t). Capacity is clamped to
// two rows so the pair selected by the working-set step can be held at once.
class QRowCache {
 public:
  QRowCache(const std::vector<double>& x, const std::vector<std::int8_t>& y,
            std::size_t dim, double gamma, std::size_t capacity)
      : x_(x), y_(y), dim_(dim), gamma_(gamma),
        capacity_(std::max<std::size_t>(capacity, 2)) {}

  const std::vector<double>& row(std::size_t i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      rows_.splice(rows_.begin(), rows_, it->second);
      return rows_.front().second;
    }
    if (rows_.size() >= capacity_) {
      index_.erase(rows_.back().first);
      rows_.pop_back();
    }
    rows_.emplace_front(i, compute_row(i));
    index_[i] = rows_.begin();
    return rows_.front().second;
  }

 private:
  std::vector<double> compute_row(std::size_t i) const {
    const std::size_t n = y_.size();
    std::vector<double> q(n);
    const double* xi = x_.data() + i * dim_;
    for (std::size_t t = 0; t < n; ++t) {
      const double* xt = x_.data() + t * dim_;
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double diff = xi[k] - xt[k];
        d2 += diff * diff;
      }
      q[t] = y_[i] * y_[t] * std::exp(-gamma_ * d2);
    }
    return q;
  }

  const std::vector<double>& x_;
  const std::vector<std::int8_t>& y_;
  std::size_t dim_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, std::vector<double>>> rows_;
  std::unordered_map<std::size_t, decltype(rows_)::iterator> index_;
};

}  // namespace

Scaler standardize_fit(const Dataset& data) {
  if (data.rows() == 0) fail(ErrorKind::EmptyDataset, "no rows to fit scaler");
  const std::size_t n = data.rows();
  const std::size_t d = data.dim;
  Scaler s;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = data.row(i);
    for (std::size_t k = 0; k < d; ++k) s.means[k] += row[k];
  }
  for (std::size_t k = 0; k < d; ++k) s.means[k] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = data.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = row[k] - s.means[k];
      s.stds[k] += diff * diff;
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    s.stds[k] = std::sqrt(s.stds[k] / static_cast<double>(n));
    if (s.stds[k] <= 0.0) s.stds[k] = 1.0;
  }
  return s;
}

std::vector<double> standardize_apply(const Scaler& scaler,
                                      std::span<const double> row) {
  if (row.size() != scaler.means.size())
    fail(ErrorKind::DimensionMismatch, "row width does not match scaler");
  std::vector<double> out(row.size());
  for (std::size_t k = 0; k < row.size(); ++k)
    out[k] = (row[k] - scaler.means[k]) / scaler.stds[k];
  return out;
}

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double gamma) {
  if (x.size() != y.size())
    fail(ErrorKind::DimensionMismatch, "kernel arguments differ in dimension");
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

SvmTrainResult train_svm_detailed(const Dataset& data, const SvmHyperparams& hp,
                                  SmoTrace* trace) {
  validate_hp(hp);
  const std::size_t n = data.rows();
  if (n == 0) fail(ErrorKind::EmptyDataset, "cannot train on empty dataset");
  if (!data.has_both_classes())
    fail(ErrorKind::SingleClass, "training data must contain both classes");

  const std::size_t d = data.dim;
  const double c = hp.c;

  Scaler scaler = standardize_fit(data);
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    auto z = standardize_apply(scaler, data.row(i));
    std::copy(z.begin(), z.end(), x.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const std::vector<std::int8_t>& y = data.labels;

  // Minimization form: obj(a) = a'Qa/2 - e'a, gradient G = Qa - e.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  QRowCache cache(x, y, d, hp.gamma, hp.cache_rows);

  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0.0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0.0);
  };

  double m_up = 0.0, m_low = 0.0;
  bool converged = false;
  std::size_t iter = 0;
  for (; iter < hp.max_iter; ++iter) {
    // maximal violating pair
    std::size_t i = n, j = n;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i == n || j == n || m_up - m_low <= hp.tol) {
      converged = true;
      break;
    }

    const std::vector<double>& qi = cache.row(i);
    const std::vector<double>& qj = cache.row(j);

    const double kii = qi[i];
    const double kjj = qj[j];
    const double kij = y[i] * y[j] * qi[j];
    double eta = kii + kjj - 2.0 * kij;
    if (eta < 1e-12) eta = 1e-12;

    const double room_i = y[i] > 0 ? c - alpha[i] : alpha[i];
    const double room_j = y[j] > 0 ? alpha[j] : c - alpha[j];
    double step = (m_up - m_low) / eta;
    step = std::min(step, std::min(room_i, room_j));

    const double delta_i = y[i] > 0 ? step : -step;
    const double delta_j = y[j] > 0 ? -step : step;
    alpha[i] = std::clamp(alpha[i] + delta_i, 0.0, c);
    alpha[j] = std::clamp(alpha[j] + delta_j, 0.0, c);

    for (std::size_t t = 0; t < n; ++t)
      grad[t] += qi[t] * delta_i + qj[t] * delta_j;

    if (trace) {
      double sum_a = 0.0, ag = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        sum_a += alpha[t];
        ag += alpha[t] * grad[t];
      }
      trace->objective.push_back(0.5 * (sum_a - ag));
    }
  }

  // u_i = sum_j alpha_j y_j K_ij recovered from the gradient
  std::vector<double> u(n);
  for (std::size_t t = 0; t < n; ++t) u[t] = y[t] * (grad[t] + 1.0);

  double bias;
  std::size_t n_free = 0;
  double free_sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      free_sum += y[t] - u[t];
      ++n_free;
    }
  }
  if (n_free > 0) {
    bias = free_sum / static_cast<double>(n_free);
  } else {
    bias = (m_up + m_low) / 2.0;
    if (!std::isfinite(bias)) bias = 0.0;
  }

  SvmTrainResult result;
  result.model.hp = hp;
  result.model.scaler = std::move(scaler);
  result.model.dim = d;
  result.model.bias = bias;
  result.model.converged = converged;
  result.model.iterations = iter;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      result.model.support_vectors.insert(
          result.model.support_vectors.end(),
          x.begin() + static_cast<std::ptrdiff_t>(t * d),
          x.begin() + static_cast<std::ptrdiff_t>((t + 1) * d));
      result.model.dual_coeffs.push_back(alpha[t] * y[t]);
    }
  }

  result.alpha = std::move(alpha);
  result.train_decisions.resize(n);
  for (std::size_t t = 0; t < n; ++t) result.train_decisions[t] = u[t] + bias;

  auto [platt_a, platt_b] = fit_platt(result.train_decisions, y);
  result.model.platt_a = platt_a;
  result.model.platt_b = platt_b;
  return result;
}

SvmModel train_svm(const Dataset& data, const SvmHyperparams& hp,
                   SmoTrace* trace) {
  return train_svm_detailed(data, hp, trace).model;
}

double decision(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim)
    fail(ErrorKind::DimensionMismatch, "input dimension does not match model");
  const std::vector<double> z = standardize_apply(model.scaler, x);
  double f = model.bias;
  for (std::size_t i = 0; i < model.n_support(); ++i)
    f += model.dual_coeffs[i] * rbf_kernel(model.support_vector(i), z, model.hp.gamma);
  return f;
}

std::pair<double, double> fit_platt(const std::vector<double>& scores,
                                    const std::vector<std::int8_t>& labels) {
  if (scores.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "scores and labels differ in length");
  if (scores.size() < 2)
    fail(ErrorKind::TooFewRows, "need at least two scores to calibrate");

  const std::size_t n = scores.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (auto l : labels) (l > 0 ? prior1 : prior0) += 1.0;

  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i)
    target[i] = labels[i] > 0 ? hi_target : lo_target;

  const int max_iter = 100;
  const double min_step = 1e-10;
  const double sigma = 1e-12;  // Hessian regularizer
  const double eps = 1e-5;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

  auto nll = [&](double pa, double pb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = pa * scores[i] + pb;
      if (z >= 0.0)
        f += target[i] * z + std::log1p(std::exp(-z));
      else
        f += (target[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double fval = nll(a, b);
  for (int it = 0; it < max_iter; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = a * scores[i] + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = target[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    bool accepted = false;
    while (step >= min_step) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = nll(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted) break;  // line search failed
  }
  return {a, b};
}

double sigmoid_prob(double score, double a, double b) {
  const double z = a * score + b;
  double p;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    p = e / (1.0 + e);
  } else {
    p = 1.0 / (1.0 + std::exp(z));
  }
  return std::clamp(p, 1e-15, 1.0 - 1e-15);
}

double predict_prob(const SvmModel& model, std::span<const double> x) {
  return sigmoid_prob(decision(model, x), model.platt_a, model.platt_b);
}

GridSpec default_grid() {
  GridSpec g;
  for (int e = -5; e <= 15; e += 2) g.c_values.push_back(std::ldexp(1.0, e));
  for (int e = -15; e <= 3; e += 2)
    g.gamma_values.push_back(std::ldexp(1.0, e));
  return g;
}

GridResult grid_search(const Dataset& data, const GridSpec& grid,
                       std::uint64_t seed, const SvmHyperparams& base,
                       int jobs) {
  if (grid.c_values.empty() || grid.gamma_values.empty())
    fail(ErrorKind::InvalidConfig, "grid must be non-empty");
  if (grid.folds < 2) fail(ErrorKind::InvalidConfig, "need at least 2 folds");
  if (data.rows() == 0) fail(ErrorKind::EmptyDataset, "grid search needs data");
  if (!data.has_both_classes())
    fail(ErrorKind::SingleClass, "grid search needs both classes");

  const std::size_t folds = static_cast<std::size_t>(grid.folds);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.rows(); ++i)
    (data.labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.size() < folds || neg.size() < folds)
    fail(ErrorKind::SingleClass,
         "too few rows per class for a stratified split");

  // Seeded stratified shuffle, identical for every grid cell.
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::size_t> fold_of(data.rows());
  for (std::size_t k = 0; k < pos.size(); ++k) fold_of[pos[k]] = k % folds;
  for (std::size_t k = 0; k < neg.size(); ++k) fold_of[neg[k]] = k % folds;

  struct Cell {
    double c, gamma, acc;
  };
  std::vector<Cell> cells;
  for (double c : grid.c_values)
    for (double g : grid.gamma_values) cells.push_back({c, g, 0.0});

  parallel_for(cells.size(), jobs, [&](std::size_t ci) {
    SvmHyperparams hp = base;
    hp.c = cells[ci].c;
    hp.gamma = cells[ci].gamma;
    double acc_sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      Dataset train, test;
      train.dim = test.dim = data.dim;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (fold_of[i] == f)
          test.push_row(data.row(i), data.labels[i]);
        else
          train.push_row(data.row(i), data.labels[i]);
      }
      SvmModel model = train_svm(train, hp);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < test.rows(); ++i) {
        const int pred = decision(model, test.row(i)) >= 0.0 ? +1 : -1;
        if (pred == test.labels[i]) ++correct;
      }
      acc_sum += static_cast<double>(correct) / static_cast<double>(test.rows());
    }
    cells[ci].acc = acc_sum / static_cast<double>(folds);
  });

  // Ties prefer smaller C, then smaller gamma.
  const Cell* best = &cells[0];
  for (const Cell& cell : cells) {
    if (cell.acc > best->acc ||
        (cell.acc == best->acc &&
         (cell.c < best->c || (cell.c == best->c && cell.gamma < best->gamma))))
      best = &cell;
  }

  GridResult result;
  result.best = base;
  result.best.c = best->c;
  result.best.gamma = best->gamma;
  result.cv_accuracy = best->acc;
  return result;
}

nlohmann::json svm_to_json(const SvmModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["C"] = model.hp.c;
  j["gamma"] = model.hp.gamma;
  j["tol"] = model.hp.tol;
  j["max_iter"] = model.hp.max_iter;
  j["bias"] = model.bias;
  j["platt_a"] = model.platt_a;
  j["platt_b"] = model.platt_b;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["scaler"] = {{"means", model.scaler.means}, {"stds", model.scaler.stds}};
  auto svs = nlohmann::json::array();
  for (std::size_t i = 0; i < model.n_support(); ++i) {
    auto row = model.support_vector(i);
    svs.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["support_vectors"] = std::move(svs);
  j["dual_coeffs"] = model.dual_coeffs;
  return j;
}

SvmModel svm_from_json(const nlohmann::json& j) {
  SvmModel model;
  model.hp.c = j.at("C").get<double>();
  model.hp.gamma = j.at("gamma").get<double>();
  model.hp.tol = j.value("tol", 1e-3);
  model.hp.max_iter = j.value("max_iter", std::size_t{2000000});
  model.bias = j.at("bias").get<double>();
  model.platt_a = j.at("platt_a").get<double>();
  model.platt_b = j.at("platt_b").get<double>();
  model.converged = j.value("converged", true);
  model.iterations = j.value("iterations", std::size_t{0});
  model.scaler.means = j.at("scaler").at("means").get<std::vector<double>>();
  model.scaler.stds = j.at("scaler").at("stds").get<std::vector<double>>();
  model.dim = model.scaler.means.size();
  for (const auto& row : j.at("support_vectors")) {
    auto v = row.get<std::vector<double>>();
    if (v.size() != model.dim)
      fail(ErrorKind::MalformedHeader, "support vector width mismatch");
    model.support_vectors.insert(model.support_vectors.end(), v.begin(), v.end());
  }
  model.dual_coeffs = j.at("dual_coeffs").get<std::vector<double>>();
  if (model.dual_coeffs.size() != model.n_support())
    fail(ErrorKind::MalformedHeader, "dual coefficient count mismatch");
  return model;
}

}  // namespace vad
