#include "vad/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "vad/error.hpp"

namespace vad {

namespace {

void check_classes(const std::vector<std::int8_t>& labels) {
  bool pos = false, neg = false;
  for (auto l : labels) (l > 0 ? pos : neg) = true;
  if (labels.empty()) fail(ErrorKind::EmptyDataset, "no labels");
  if (!pos || !neg)
    fail(ErrorKind::SingleClass, "need both classes for ROC metrics");
}

}  // namespace

double accuracy(const std::vector<int>& preds,
                const std::vector<std::int8_t>& labels) {
  if (preds.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "predictions and labels differ in length");
  if (preds.empty()) fail(ErrorKind::EmptyDataset, "nothing to score");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<std::int8_t>& labels) {
  if (scores.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "scores and labels differ in length");
  check_classes(labels);

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  double n_pos = 0.0, n_neg = 0.0;
  for (auto l : labels) (l > 0 ? n_pos : n_neg) += 1.0;

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    const double s = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == s) {
      (labels[idx[i]] > 0 ? tp : fp) += 1.0;
      ++i;
    }
    curve.points.push_back({fp / n_neg, tp / n_pos});
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

std::pair<double, double> operating_point(const std::vector<double>& scores,
                                          const std::vector<std::int8_t>& labels,
                                          double threshold) {
  if (scores.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "scores and labels differ in length");
  check_classes(labels);
  double tp = 0.0, fp = 0.0, tn = 0.0, fn = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred_pos = scores[i] >= threshold;
    if (labels[i] > 0)
      (pred_pos ? tp : fn) += 1.0;
    else
      (pred_pos ? fp : tn) += 1.0;
  }
  return {fp / (fp + tn), tp / (tp + fn)};
}

EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<std::int8_t>& labels,
                           double threshold) {
  EvalReport report;
  report.threshold = threshold;
  RocCurve curve = roc_auc(scores, labels);
  report.auc = curve.auc;
  report.roc = std::move(curve.points);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred_pos = scores[i] >= threshold;
    if (labels[i] > 0)
      ++(pred_pos ? report.tp : report.fn);
    else
      ++(pred_pos ? report.fp : report.tn);
  }
  const auto total = report.tp + report.fp + report.tn + report.fn;
  report.accuracy =
      static_cast<double>(report.tp + report.tn) / static_cast<double>(total);
  report.tpr = static_cast<double>(report.tp) /
               static_cast<double>(report.tp + report.fn);
  report.fpr = static_cast<double>(report.fp) /
               static_cast<double>(report.fp + report.tn);
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["confusion"] = {{"tp", report.tp},
                    {"fp", report.fp},
                    {"tn", report.tn},
                    {"fn", report.fn}};
  j["tpr"] = report.tpr;
  j["fpr"] = report.fpr;
  j["threshold"] = report.threshold;
  j["auc"] = report.auc;
  auto roc = nlohmann::json::array();
  for (const RocPoint& p : report.roc) roc.push_back({p.fpr, p.tpr});
  j["roc"] = std::move(roc);
  return j;
}

void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  out << "fpr,tpr\n";
  char buf[64];
  for (const RocPoint& p : roc) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.fpr, p.tpr);
    out << buf;
  }
  if (!out) fail(ErrorKind::IoError, "failed writing " + path);
}

}  // namespace vad
