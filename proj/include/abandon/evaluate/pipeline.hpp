#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abandon/evaluate/groups.hpp"
#include "abandon/evaluate/metrics.hpp"
#include "abandon/mlcore/isolation_forest.hpp"
#include "abandon/mlcore/training.hpp"

namespace abandon {

// How class imbalance is handled, by the names of the ablation rows.
enum class ImbalanceStrategy {
  None,
  Resampling,
  CostSensitive,
  ResamplingCostSensitive,
  Ensemble,
  EnsembleResampling,
  EnsembleCostSensitive,
};
inline constexpr std::array<ImbalanceStrategy, 7> kAllImbalanceStrategies = {
    ImbalanceStrategy::None,     ImbalanceStrategy::Resampling,         ImbalanceStrategy::CostSensitive,
    ImbalanceStrategy::ResamplingCostSensitive, ImbalanceStrategy::Ensemble, ImbalanceStrategy::EnsembleResampling,
    ImbalanceStrategy::EnsembleCostSensitive};

std::string_view imbalance_strategy_name(ImbalanceStrategy s);
ImbalanceStrategy parse_imbalance_strategy(std::string_view name);

struct PipelineConfig {
  bool remove_outliers = true;
  IsolationForestParams outliers;
  double test_fraction = 0.2;
  std::size_t selection_folds = 10;
  std::size_t tuning_folds = 5;
  std::vector<std::size_t> k_grid = {10, 20, 30, 40, 50, 60, 70, 80};
  std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
  nlohmann::json grids = default_grids();
  // Without tuning the 5-fold CV still runs, on the default hyperparameters.
  bool tune = true;
  ImbalanceStrategy strategy = ImbalanceStrategy::Resampling;
  RebalanceParams rebalance;
  int ensemble_members = 10;
  std::uint64_t seed = 42;
  int threads = 1;

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
};

// The model spec and fold-local options one model kind gets under the
// configured imbalance strategy (tree ensembles never rebalance or select).
Candidate candidate_for(ModelKind kind, std::size_t top_k, const PipelineConfig& config, std::uint64_t seed);

// Row indices into the full matrix.
struct PreparedSplit {
  std::vector<std::size_t> outliers;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  double outlier_threshold = 0;

  nlohmann::json to_json() const;
  static PreparedSplit from_json(const nlohmann::json& j);
};

// Outlier removal on all rows (unsupervised), then the stratified holdout
// split of the inliers.
PreparedSplit prepare_split(const Matrix& X, const Labels& y, const PipelineConfig& config);

struct SelectionResult {
  std::vector<std::size_t> k_values;
  std::vector<double> mean_f1;
  std::size_t best_k = 0;  // 0 = every feature

  nlohmann::json to_json() const;
};

struct TrainingOutcome {
  ModelKind kind = ModelKind::NB;
  TrainedModel model;
  std::optional<SelectionResult> selection;
  GridSearchResult tuning;
  std::size_t selection_folds = 0;
  std::size_t tuning_folds = 0;

  const CandidateScore& chosen_scores() const { return tuning.scores[tuning.best]; }
  nlohmann::json to_json() const;
};

// Selection CV over the k grid (non-ensemble kinds), tuning CV over the
// kind's grid at the chosen k, and the final fit on all training rows.
TrainingOutcome train_with_protocol(ModelKind kind, const Matrix& X_train, const Labels& y_train,
                                    const std::vector<std::string>& names, const PipelineConfig& config,
                                    std::uint64_t seed);

// Test-set report with intervals from the tuning folds.
EvalReport evaluate_trained(const TrainedModel& model, const CandidateScore& folds, const Matrix& X_test,
                            const Labels& y_test);

enum class BaselineKind { Stratified, DtRatio, DtTrend, NbNfe, DtNfe };
inline constexpr std::array<BaselineKind, 5> kAllBaselines = {BaselineKind::Stratified, BaselineKind::DtRatio,
                                                              BaselineKind::DtTrend, BaselineKind::NbNfe,
                                                              BaselineKind::DtNfe};
std::string_view baseline_name(BaselineKind b);

inline constexpr std::string_view kRatioFeature = "comment_ratio";
inline constexpr std::string_view kTrendFeature = "trend_ext";
inline constexpr int kBaselineTreeDepth = 3;

struct Prediction {
  Labels labels;
  std::vector<double> scores;
};

// Fits a baseline on the training rows and predicts the test rows. The
// stratified baseline samples labels from the training prior; its score is
// the sampled label.
Prediction baseline_predict(BaselineKind kind, const Matrix& X_train, const Labels& y_train, const Matrix& X_test,
                            const std::vector<std::string>& names, std::uint64_t seed);

struct BaselineResult {
  BaselineKind kind = BaselineKind::Stratified;
  EvalReport report;
};

// A baseline's test report with fold scores from the tuning folds.
BaselineResult run_baseline(BaselineKind kind, const Matrix& X_train, const Labels& y_train, const Matrix& X_test,
                            const Labels& y_test, const std::vector<std::string>& names, const PipelineConfig& config);

struct ModelResult {
  TrainingOutcome outcome;
  EvalReport report;
};

// Rebuilds the outcome of train_with_protocol from a saved model's metadata.
// Only the chosen grid point survives; throws DataError when the fold scores
// are missing.
TrainingOutcome restore_outcome(ModelKind kind, TrainedModel model, const PipelineConfig& config);

struct ExperimentResult {
  PreparedSplit split;
  std::vector<ModelResult> models;
  std::vector<BaselineResult> baselines;
  nlohmann::json protocol;

  const ModelResult* find(ModelKind kind) const;
  const BaselineResult* find(BaselineKind kind) const;
  nlohmann::json to_json() const;
};

// Record of the protocol a run followed, read back by acceptance checks.
nlohmann::json protocol_manifest(const ExperimentResult& r, const PipelineConfig& config, const Labels& y,
                                 std::size_t n_features);

ExperimentResult run_experiment(const Matrix& X, const Labels& y, const std::vector<std::string>& names,
                                const PipelineConfig& config, bool with_baselines = true);

// Same, on a split computed elsewhere.
ExperimentResult run_experiment_on_split(const Matrix& X, const Labels& y, const std::vector<std::string>& names,
                                         const PipelineConfig& config, const PreparedSplit& split,
                                         bool with_baselines);

struct MetricSummary {
  double mean = 0, std = 0;
  std::size_t n = 0;
};

struct LoocvRound {
  std::string group;
  std::size_t train_users = 0;
  std::size_t test_users = 0;
  std::size_t shared_users = 0;  // |train ∩ test|, always 0
  bool defined = true;           // false when the held-out group has one class
  std::vector<std::pair<ModelKind, EvalReport>> reports;
};

struct LoocvResult {
  std::vector<LoocvRound> rounds;
  // Per model: mean and sample std over the defined rounds.
  std::vector<std::pair<ModelKind, std::map<std::string, MetricSummary>>> aggregate;
  OverlapMatrix overlap;

  nlohmann::json to_json() const;
};

// Leave-one-group-out: each round tests on one group's members and trains on
// the members of the other groups minus the test users. Users in no group
// are left out. Round g uses seed ^ g.
LoocvResult run_loocv(const Matrix& X, const Labels& y, const GroupAssignment& groups,
                      const std::vector<std::string>& names, const PipelineConfig& config);

struct ActivityBinResult {
  std::string label;
  std::size_t users = 0;
  std::optional<ExperimentResult> experiment;  // empty when the bin is unusable
  std::string skipped_reason;
};

struct ActivityStudy {
  ActivityBinPlan plan;
  std::vector<ActivityBinResult> bins;
  nlohmann::json to_json() const;
};

// One full pipeline run per activity bin of the given comment counts.
ActivityStudy run_activity_bins(const Matrix& X, const Labels& y, std::span<const double> comment_counts,
                                const std::vector<std::string>& names, const PipelineConfig& config);

// One run of the given model kind per imbalance strategy, on a shared split.
std::vector<std::pair<ImbalanceStrategy, ModelResult>> run_imbalance_ablation(
    const Matrix& X, const Labels& y, const std::vector<std::string>& names, const PipelineConfig& config,
    ModelKind kind = ModelKind::SVM,
    std::vector<ImbalanceStrategy> strategies = {kAllImbalanceStrategies.begin(), kAllImbalanceStrategies.end()});

}  // namespace abandon
