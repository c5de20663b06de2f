#include "vad/ensemble.hpp"

#include <numeric>
#include <string>

#include "vad/error.hpp"
#include "vad/util.hpp"

namespace vad {

std::vector<Dataset> partition(const Dataset& data, std::size_t n_parts,
                               std::uint64_t seed) {
  if (n_parts == 0) fail(ErrorKind::InvalidConfig, "need at least one part");
  if (data.rows() < n_parts)
    fail(ErrorKind::TooFewRows, "fewer rows than requested parts");

  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t base = data.rows() / n_parts;
  const std::size_t rem = data.rows() % n_parts;

  std::vector<Dataset> parts(n_parts);
  std::size_t pos = 0;
  for (std::size_t p = 0; p < n_parts; ++p) {
    const std::size_t size = base + (p < rem ? 1 : 0);
    parts[p].dim = data.dim;
    for (std::size_t k = 0; k < size; ++k) {
      const std::size_t i = order[pos++];
      parts[p].push_row(data.row(i), data.labels[i]);
      if (i < data.provenance.size())
        parts[p].provenance.push_back(data.provenance[i]);
    }
    if (!parts[p].has_both_classes())
      fail(ErrorKind::SingleClassPartition,
           "partition " + std::to_string(p) + " lost one class");
  }
  return parts;
}

std::vector<double> meta_features(const std::vector<SvmModel>& members,
                                  std::span<const double> x) {
  std::vector<double> probs(members.size());
  for (std::size_t i = 0; i < members.size(); ++i)
    probs[i] = predict_prob(members[i], x);
  return probs;
}

EnsembleModel train_ensemble(const Dataset& data, const EnsembleConfig& cfg) {
  if (cfg.n_members < 1)
    fail(ErrorKind::InvalidConfig, "need at least one ensemble member");

  const std::size_t n = cfg.n_members;
  std::vector<Dataset> parts = partition(data, cfg.n_partitions(), cfg.seed);

  // Resolve member hyperparameters. Default: one search on part 0, shared.
  std::vector<SvmHyperparams> member_hp(n);
  if (cfg.member_hp) {
    for (auto& hp : member_hp) hp = *cfg.member_hp;
  } else if (!cfg.per_member_grid) {
    GridResult shared =
        grid_search(parts[0], cfg.grid, cfg.seed ^ 0, cfg.base, cfg.jobs);
    for (auto& hp : member_hp) hp = shared.best;
  }

  EnsembleModel ens;
  ens.config = cfg;
  ens.members.resize(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    try {
      SvmHyperparams hp = member_hp[i];
      if (!cfg.member_hp && cfg.per_member_grid)
        hp = grid_search(parts[i], cfg.grid, cfg.seed ^ i, cfg.base, 1).best;
      ens.members[i] = train_svm(parts[i], hp);
    } catch (const Error& e) {
      fail(e.kind(), "member " + std::to_string(i) + ": " + e.what());
    }
  });

  // Stack the held-out part into the meta feature space.
  const Dataset& held_out = parts[n];
  Dataset meta_data;
  meta_data.dim = n;
  std::vector<std::vector<double>> stacked(held_out.rows());
  parallel_for(held_out.rows(), cfg.jobs, [&](std::size_t r) {
    stacked[r] = meta_features(ens.members, held_out.row(r));
  });
  for (std::size_t r = 0; r < held_out.rows(); ++r)
    meta_data.push_row(stacked[r], held_out.labels[r]);

  SvmHyperparams meta_hp;
  if (cfg.meta_hp) {
    meta_hp = *cfg.meta_hp;
  } else {
    meta_hp =
        grid_search(meta_data, cfg.grid, cfg.seed ^ n, cfg.base, cfg.jobs).best;
  }
  try {
    ens.meta = train_svm(meta_data, meta_hp);
  } catch (const Error& e) {
    fail(e.kind(), std::string("meta layer: ") + e.what());
  }
  return ens;
}

EnsemblePrediction predict(const EnsembleModel& ens, std::span<const double> x) {
  EnsemblePrediction out;
  out.prob = predict_prob(ens.meta, meta_features(ens.members, x));
  out.label = out.prob >= 0.5 ? +1 : -1;
  return out;
}

nlohmann::json ensemble_to_json(const EnsembleModel& ens) {
  nlohmann::json j;
  j["version"] = 1;
  j["layers"] = 2;  // reserved; deeper stacks are not implemented
  j["n_members"] = ens.members.size();
  j["seed"] = ens.config.seed;
  auto members = nlohmann::json::array();
  for (const SvmModel& m : ens.members) members.push_back(svm_to_json(m));
  j["members"] = std::move(members);
  j["meta"] = svm_to_json(ens.meta);
  nlohmann::json cfg;
  cfg["n_members"] = ens.config.n_members;
  cfg["seed"] = ens.config.seed;
  cfg["per_member_grid"] = ens.config.per_member_grid;
  cfg["member_hp"] = nullptr;
  cfg["meta_hp"] = nullptr;
  if (ens.config.member_hp)
    cfg["member_hp"] = {{"C", ens.config.member_hp->c},
                        {"gamma", ens.config.member_hp->gamma}};
  if (ens.config.meta_hp)
    cfg["meta_hp"] = {{"C", ens.config.meta_hp->c},
                      {"gamma", ens.config.meta_hp->gamma}};
  j["config"] = std::move(cfg);
  return j;
}

EnsembleModel ensemble_from_json(const nlohmann::json& j) {
  EnsembleModel ens;
  const auto n = j.at("n_members").get<std::size_t>();
  for (const auto& m : j.at("members")) ens.members.push_back(svm_from_json(m));
  if (ens.members.size() != n)
    fail(ErrorKind::MalformedHeader, "member count mismatch");
  ens.meta = svm_from_json(j.at("meta"));
  if (ens.meta.dim != ens.members.size())
    fail(ErrorKind::MalformedHeader,
         "meta input dimension does not match member count");
  ens.config.n_members = n;
  ens.config.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("config")) {
    const auto& cfg = j["config"];
    ens.config.per_member_grid = cfg.value("per_member_grid", false);
    if (cfg.contains("member_hp") && !cfg["member_hp"].is_null()) {
      SvmHyperparams hp;
      hp.c = cfg["member_hp"].at("C").get<double>();
      hp.gamma = cfg["member_hp"].at("gamma").get<double>();
      ens.config.member_hp = hp;
    }
    if (cfg.contains("meta_hp") && !cfg["meta_hp"].is_null()) {
      SvmHyperparams hp;
      hp.c = cfg["meta_hp"].at("C").get<double>();
      hp.gamma = cfg["meta_hp"].at("gamma").get<double>();
      ens.config.meta_hp = hp;
    }
  }
  return ens;
}

}  // namespace vad
