#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace vad {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // starts at (0,0), ends at (1,1)
  double auc = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double tpr = 0.0;  // at the report threshold
  double fpr = 0.0;
  double threshold = 0.5;
  double auc = 0.0;
  std::vector<RocPoint> roc;
};

// Fraction of positions where preds[i] == labels[i].
double accuracy(const std::vector<int>& preds,
                const std::vector<std::int8_t>& labels);

// Threshold sweep over the sorted unique scores, ties grouped so equal scores
// flip together (diagonal segments). The trapezoid AUC then equals the
// pairwise statistic P(s+ > s-) + P(s+ = s-)/2.
RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<std::int8_t>& labels);

// (fpr, tpr) with predicted positive exactly when score >= threshold.
std::pair<double, double> operating_point(const std::vector<double>& scores,
                                          const std::vector<std::int8_t>& labels,
                                          double threshold = 0.5);

// Full report at the given threshold: confusion counts, accuracy, the
// operating point, and the ROC/AUC over the raw scores.
EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<std::int8_t>& labels,
                           double threshold = 0.5);

nlohmann::json report_to_json(const EvalReport& report);

// CSV rows "fpr,tpr", one point per line after a header row.
void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc);

}  // namespace vad
