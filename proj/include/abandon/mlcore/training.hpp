#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "abandon/mlcore/classifier.hpp"
#include "abandon/mlcore/preprocess.hpp"

namespace abandon {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Fold-local preprocessing applied before fitting: z-scoring, ANOVA top-k
// selection (0 keeps every feature) and rebalancing, in that order, all
// fitted on the training rows only.
struct TrainOptions {
  std::size_t top_k = 0;
  RebalanceParams rebalance;
};

// Ensembles keep every feature and skip rebalancing.
TrainOptions options_for(ModelKind kind, std::size_t top_k, const RebalanceParams& rebalance);

class TrainedModel {
 public:
  ModelSpec spec;
  std::vector<std::string> input_names;  // columns the model expects
  std::vector<std::size_t> selected;     // indices into input_names
  ScalerParams scaler;                   // over the selected columns
  std::unique_ptr<Classifier> classifier;
  RebalanceCounts class_counts_before;
  RebalanceCounts class_counts_after;
  nlohmann::json metadata = nlohmann::json::object();

  Matrix transform(const Matrix& X) const;
  std::vector<double> decision_scores(const Matrix& X) const;
  Labels predict(const Matrix& X) const;
  std::vector<std::string> selected_names() const;

  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);
};

TrainedModel train_model(const ModelSpec& spec, const Matrix& X, const Labels& y, const TrainOptions& options,
                         const std::vector<std::string>& names = {});

// Positive-class F1 of a model trained on (X_train, y_train) and scored on
// the validation rows.
double score_fold(const ModelSpec& spec, const Matrix& X_train, const Labels& y_train, const Matrix& X_val,
                  const Labels& y_val, const TrainOptions& options);
// Validation predictions of a model trained on the training rows.
Labels predict_fold(const ModelSpec& spec, const Matrix& X_train, const Labels& y_train, const Matrix& X_val,
                    const TrainOptions& options);

struct Candidate {
  ModelSpec spec;
  TrainOptions options;
};

struct CandidateScore {
  std::vector<double> fold_f1;
  std::vector<double> fold_micro_f1;
  double mean_f1 = 0;
};

// Every candidate on every fold of the plan; (candidate, fold) pairs run in
// parallel with results independent of the schedule.
std::vector<CandidateScore> cross_validate(const std::vector<Candidate>& candidates, const Matrix& X, const Labels& y,
                                           const FoldPlan& plan, int threads);

// Index of the best mean score; the first candidate wins ties.
std::size_t best_candidate(const std::vector<CandidateScore>& scores);

struct GridSearchResult {
  std::vector<Hyperparams> points;
  std::vector<CandidateScore> scores;
  std::size_t best = 0;

  const Hyperparams& best_params() const { return points[best]; }
  nlohmann::json to_json() const;
};

GridSearchResult grid_search(const ModelSpec& base, const std::vector<Hyperparams>& grid, const Matrix& X,
                             const Labels& y, const FoldPlan& plan, const TrainOptions& options, int threads);

}  // namespace abandon
