#include "abandon/evaluate/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"
#include "abandon/common/stats.hpp"

namespace abandon {

Confusion confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw UsageError("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bool t = truth[i] == 1, p = predicted[i] == 1;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {
double safe_ratio(double a, double b) { return b == 0 ? 0.0 : a / b; }
}  // namespace

double precision(const Confusion& c) { return safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp)); }
double recall(const Confusion& c) { return safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn)); }
double f1(const Confusion& c) {
  return safe_ratio(2.0 * static_cast<double>(c.tp), static_cast<double>(2 * c.tp + c.fp + c.fn));
}
double micro_f1(const Confusion& c) {
  return safe_ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
}

double roc_auc(std::span<const int> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw UsageError("roc_auc: length mismatch");
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: sum of positive ranks with ties averaged.
  double pos = 0, neg = 0, rank_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] == 1) {
        rank_sum += avg_rank;
        ++pos;
      } else {
        ++neg;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) throw UsageError("roc_auc needs both classes");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

nlohmann::json MetricSet::to_json() const {
  return {{"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"auc", auc},
          {"micro_f1", micro_f1},
          {"positives", positives},
          {"negatives", negatives},
          {"precision_defined", precision_defined},
          {"recall_defined", recall_defined},
          {"auc_defined", auc_defined}};
}

MetricSet evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                               std::span<const double> scores) {
  auto c = confusion(truth, predicted);
  MetricSet m;
  m.precision = precision(c);
  m.recall = recall(c);
  m.f1 = f1(c);
  m.micro_f1 = micro_f1(c);
  m.positives = c.tp + c.fn;
  m.negatives = c.tn + c.fp;
  m.precision_defined = c.tp + c.fp > 0;
  m.recall_defined = m.positives > 0;
  m.auc_defined = m.positives > 0 && m.negatives > 0;
  m.auc = m.auc_defined ? roc_auc(truth, scores) : 0.5;
  return m;
}

Interval fold_ci(std::span<const double> fold_scores, double level) {
  if (fold_scores.empty()) throw UsageError("confidence interval over zero folds");
  if (!(level > 0 && level < 1)) throw UsageError("confidence level must be in (0, 1)");
  if (fold_scores.size() == 1) {
    log::warn("confidence interval from a single fold is degenerate");
    return {fold_scores[0], fold_scores[0]};
  }
  std::vector<double> v(fold_scores.begin(), fold_scores.end());
  std::sort(v.begin(), v.end());
  const double tail = (1.0 - level) / 2.0;
  return {stats::quantile_sorted(v, tail), stats::quantile_sorted(v, 1.0 - tail)};
}

std::vector<PrPoint> pr_curve(std::span<const int> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw UsageError("pr_curve: length mismatch");
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double positives = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
  std::vector<PrPoint> out;
  double tp = 0, taken = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += truth[order[j]] == 1;
      ++taken;
      ++j;
    }
    out.push_back({scores[order[i]], tp / taken, positives > 0 ? tp / positives : 0.0});
    i = j;
  }
  return out;
}

nlohmann::json EvalReport::to_json(bool include_curve) const {
  nlohmann::json j = test.to_json();
  j["fold_f1"] = fold_f1;
  j["fold_micro_f1"] = fold_micro_f1;
  j["ci_positive_f1"] = ci_positive_f1.to_json();
  j["ci_micro_f1"] = ci_micro_f1.to_json();
  j["ci_method"] = "percentile of fold scores";
  j["p_used"] = p_used;
  if (include_curve) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : pr) curve.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
    j["pr_curve"] = std::move(curve);
  }
  return j;
}

EvalReport make_report(std::span<const int> truth, std::span<const int> predicted, std::span<const double> scores,
                       std::vector<double> fold_f1, std::vector<double> fold_micro_f1, std::size_t p_used) {
  EvalReport r;
  r.test = evaluate_predictions(truth, predicted, scores);
  r.pr = pr_curve(truth, scores);
  r.p_used = p_used;
  r.fold_f1 = std::move(fold_f1);
  r.fold_micro_f1 = std::move(fold_micro_f1);
  r.ci_positive_f1 = r.fold_f1.empty() ? Interval{r.test.f1, r.test.f1} : fold_ci(r.fold_f1);
  r.ci_micro_f1 = r.fold_micro_f1.empty() ? Interval{r.test.micro_f1, r.test.micro_f1} : fold_ci(r.fold_micro_f1);
  return r;
}

}  // namespace abandon
