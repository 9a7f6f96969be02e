#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "abandon/common/matrix.hpp"

namespace abandon {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

Confusion confusion(std::span<const int> truth, std::span<const int> predicted);

// Positive-class metrics; an undefined ratio (0/0) is reported as 0.
double precision(const Confusion& c);
double recall(const Confusion& c);
double f1(const Confusion& c);
// Micro-averaged F1 over both classes, i.e. accuracy.
double micro_f1(const Confusion& c);

// Area under the ROC curve of `scores` against binary `truth`; tied scores
// count one half. Throws UsageError unless both classes are present.
double roc_auc(std::span<const int> truth, std::span<const double> scores);

// Undefined quantities are reported as 0 (AUC as 0.5) with their flag
// cleared.
struct MetricSet {
  double precision = 0, recall = 0, f1 = 0, auc = 0, micro_f1 = 0;
  std::size_t positives = 0, negatives = 0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool auc_defined = true;

  nlohmann::json to_json() const;
};

MetricSet evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                               std::span<const double> scores);

struct Interval {
  double lo = 0, hi = 0;
  nlohmann::json to_json() const { return nlohmann::json::array({lo, hi}); }
};

// Percentile interval of per-fold scores with linear-interpolated quantiles;
// a single fold gives the degenerate [s, s] (and a warning).
Interval fold_ci(std::span<const double> fold_scores, double level = 0.95);

struct PrPoint {
  double threshold = 0, precision = 0, recall = 0;
};

// One point per distinct score, sweeping the threshold downward; a row is
// predicted positive when its score is at or above the threshold.
std::vector<PrPoint> pr_curve(std::span<const int> truth, std::span<const double> scores);

struct EvalReport {
  MetricSet test;
  std::vector<double> fold_f1;
  std::vector<double> fold_micro_f1;
  Interval ci_positive_f1;
  Interval ci_micro_f1;
  std::vector<PrPoint> pr;
  std::size_t p_used = 0;

  nlohmann::json to_json(bool include_curve = false) const;
};

// Test-set metrics plus fold-score intervals (empty folds leave the CIs at the
// test point estimates).
EvalReport make_report(std::span<const int> truth, std::span<const int> predicted, std::span<const double> scores,
                       std::vector<double> fold_f1, std::vector<double> fold_micro_f1, std::size_t p_used);

}  // namespace abandon
