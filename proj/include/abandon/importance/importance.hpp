#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "abandon/common/matrix.hpp"
#include "abandon/evaluate/pipeline.hpp"
#include "abandon/mlcore/training.hpp"

namespace abandon {

struct DroppedFeature {
  std::size_t dropped = 0;
  std::size_t kept = 0;  // the partner it was correlated with
  double r = 0;
};

struct PruneResult {
  std::vector<std::size_t> survivors;  // ascending
  std::vector<DroppedFeature> dropped;

  nlohmann::json to_json(const std::vector<std::string>& names) const;
};

// Scans feature pairs (i, j), i < j, in lexicographic order over the features
// still alive; when |r| > threshold a seeded fair coin decides which member
// to drop. After the scan no surviving pair exceeds the threshold. Constant
// columns correlate with nothing.
PruneResult prune_correlated(const Matrix& X, double threshold, std::uint64_t seed);

using LabelFn = std::function<Labels(const Matrix&)>;
using ScoreFn = std::function<std::vector<double>(const Matrix&)>;

struct PermutationImportance {
  std::vector<double> mean;  // baseline F1 minus shuffled F1, averaged
  std::vector<double> std;   // population std over repeats
  double baseline = 0;
};

// Positive-class F1 drop when one column is shuffled. Feature f's shuffles use
// seeds derived from (seed, f), so results do not depend on `threads`.
PermutationImportance permutation_importance(const LabelFn& predict, const Matrix& X, const Labels& y,
                                             std::size_t n_repeats, std::uint64_t seed, int threads = 1);
PermutationImportance permutation_importance(const TrainedModel& model, const Matrix& X, const Labels& y,
                                             std::size_t n_repeats, std::uint64_t seed, int threads = 1);

// Per-point Shapley contributions estimated by sampling feature orderings:
// each sample draws an ordering and a background row, then switches features
// from the background to the point in that order, crediting each switch's
// change in f to the feature switched. Row d of the result holds point d.
Matrix mc_shapley(const ScoreFn& f, const Matrix& points, const Matrix& background, std::size_t n_permutations,
                  std::uint64_t seed, int threads = 1);

// Mean absolute contribution per feature.
std::vector<double> shapley_local_scores(const Matrix& contributions);

// Weighted mean of per-model local scores (locals[model][feature]); weights
// must be non-negative and not all zero.
std::vector<double> fuse_global(const std::vector<std::vector<double>>& locals, const std::vector<double>& weights);

// Divides by the maximum, so the best entry becomes 1; all-zero input stays
// zero.
std::vector<double> normalize_to_max(const std::vector<double>& scores);

std::vector<double> clip_negative(std::vector<double> scores);

struct ClassImportance {
  std::string name;
  std::size_t features = 0;
  double aggregate = 0;   // sum of global scores / feature count
  double normalized = 0;  // aggregate / best aggregate
};

// Classes are reported in first-appearance order of `feature_classes`.
std::vector<ClassImportance> class_aggregate(const std::vector<double>& global_scores,
                                             const std::vector<std::string>& feature_classes);

struct ImportanceRecord {
  std::string feature;
  std::string feature_class;
  std::vector<double> local;  // per model, in model order
  double global = 0;
  double normalized = 0;
};

struct ImportanceReport {
  std::vector<std::string> model_names;
  std::vector<double> model_weights;  // positive-class F1 per model
  std::vector<ImportanceRecord> records;
  std::vector<ClassImportance> classes;
  std::string method;

  // Feature names by descending normalized score (ties by name).
  std::vector<std::string> ranking() const;
  nlohmann::json to_json() const;
  // feature,class,<model>...,global,normalized
  void write_csv(std::ostream& out) const;
  // class,features,aggregate,normalized
  void write_class_csv(std::ostream& out) const;
};

// Assembles a report from per-model local scores (negative values clipped).
ImportanceReport build_importance_report(const std::vector<std::string>& feature_names,
                                         const std::vector<std::string>& feature_classes,
                                         const std::vector<std::string>& model_names,
                                         const std::vector<std::vector<double>>& locals,
                                         const std::vector<double>& weights, std::string method);

enum class ImportanceMethod { Permutation, Shapley };
std::string_view importance_method_name(ImportanceMethod m);
ImportanceMethod parse_importance_method(std::string_view name);

struct ImportanceConfig {
  ImportanceMethod method = ImportanceMethod::Permutation;
  double correlation_threshold = 0.7;
  std::size_t n_repeats = 10;
  std::size_t shapley_permutations = 200;
  std::size_t shapley_points = 200;      // test rows explained, drawn at random
  std::size_t shapley_background = 100;  // training rows used for imputation

  void validate() const;
  nlohmann::json to_json() const;
  static ImportanceConfig from_json(const nlohmann::json& j);
};

struct ImportanceRun {
  PruneResult pruning;
  std::vector<std::string> pruned_names;
  ImportanceReport report;
  PreparedSplit split;

  nlohmann::json to_json(const std::vector<std::string>& all_names) const;
};

// Prunes correlated features on the training rows, trains every configured
// model on the survivors, and fuses per-model importances measured on the
// test rows with the models' test F1 as weights.
ImportanceRun run_importance(const Matrix& X, const Labels& y, const std::vector<std::string>& names,
                             const std::vector<std::string>& feature_classes, const PipelineConfig& pipeline,
                             const ImportanceConfig& config);

}  // namespace abandon
