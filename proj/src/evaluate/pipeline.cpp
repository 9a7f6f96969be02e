#include "abandon/evaluate/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"
#include "abandon/common/rng.hpp"
#include "abandon/common/stats.hpp"

namespace abandon {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ImbalanceStrategy, std::string_view>, 7> kStrategyNames = {{
    {ImbalanceStrategy::None, "none"},
    {ImbalanceStrategy::Resampling, "resampling"},
    {ImbalanceStrategy::CostSensitive, "cost-sensitive"},
    {ImbalanceStrategy::ResamplingCostSensitive, "resampling+cost-sensitive"},
    {ImbalanceStrategy::Ensemble, "ensemble"},
    {ImbalanceStrategy::EnsembleResampling, "ensemble+resampling"},
    {ImbalanceStrategy::EnsembleCostSensitive, "ensemble+cost-sensitive"},
}};

constexpr std::array<std::pair<BaselineKind, std::string_view>, 5> kBaselineNames = {{
    {BaselineKind::Stratified, "Stratified"},
    {BaselineKind::DtRatio, "DT Ratio"},
    {BaselineKind::DtTrend, "DT Trend"},
    {BaselineKind::NbNfe, "NB-NFE"},
    {BaselineKind::DtNfe, "DT-NFE"},
}};

// Seed streams shared by every model so all kinds see the same folds.
constexpr std::uint64_t kSplitStream = 0x5011;
constexpr std::uint64_t kSelectionStream = 0x5e1;
constexpr std::uint64_t kTuningStream = 0x7e5;
constexpr std::uint64_t kBaselineStream = 0xba5e;
constexpr std::uint64_t kModelStream = 0x30de1;

double positive_rate(const Labels& y) {
  if (y.empty()) return 0.0;
  return static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
}

bool both_classes(const Labels& y) {
  return std::find(y.begin(), y.end(), 0) != y.end() && std::find(y.begin(), y.end(), 1) != y.end();
}

json counts_json(const RebalanceCounts& c) { return {{"majority", c.majority}, {"minority", c.minority}}; }

std::size_t column_of(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw UsageError("baseline needs feature '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

std::string_view imbalance_strategy_name(ImbalanceStrategy s) {
  for (const auto& [k, n] : kStrategyNames)
    if (k == s) return n;
  throw UsageError("unknown imbalance strategy");
}

ImbalanceStrategy parse_imbalance_strategy(std::string_view name) {
  for (const auto& [k, n] : kStrategyNames)
    if (n == name) return k;
  std::string known;
  for (const auto& [k, n] : kStrategyNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw UsageError("unknown imbalance strategy '" + std::string(name) + "' (expected one of: " + known + ")");
}

std::string_view baseline_name(BaselineKind b) {
  for (const auto& [k, n] : kBaselineNames)
    if (k == b) return n;
  throw UsageError("unknown baseline");
}

void PipelineConfig::validate() const {
  if (!(test_fraction > 0 && test_fraction < 1)) throw UsageError("test_fraction must be in (0, 1)");
  if (selection_folds < 2 || tuning_folds < 2) throw UsageError("cross-validation needs at least 2 folds");
  if (k_grid.empty()) throw UsageError("k_grid must not be empty");
  for (auto k : k_grid)
    if (k == 0) throw UsageError("k_grid values must be positive");
  if (models.empty()) throw UsageError("no models configured");
  if (ensemble_members < 1) throw UsageError("ensemble_members must be at least 1");
  if (!(outliers.contamination >= 0 && outliers.contamination < 0.5)) throw UsageError("contamination must be in [0, 0.5)");
  if (outliers.n_trees == 0 || outliers.subsample < 2) throw UsageError("isolation forest needs trees and a subsample of 2+");
  if (threads < 1) throw UsageError("threads must be at least 1");
  if (!(rebalance.oversample_fraction > 0 && rebalance.oversample_fraction <= 1))
    throw UsageError("oversample_fraction must be in (0, 1]");
  if (!(rebalance.majority_per_minority >= 1)) throw UsageError("majority_per_minority must be at least 1");
  if (!grids.is_object()) throw UsageError("grids must be an object keyed by model name");
  for (const auto& [name, grid] : grids.items()) {
    auto kind = parse_model_kind(name);
    for (const auto& point : expand_grid(grid)) validate_hyperparams(kind, with_defaults(kind, point));
  }
}

json PipelineConfig::to_json() const {
  json m = json::array();
  for (auto k : models) m.push_back(std::string(model_kind_name(k)));
  return {{"remove_outliers", remove_outliers},
          {"contamination", outliers.contamination},
          {"isolation_trees", outliers.n_trees},
          {"isolation_subsample", outliers.subsample},
          {"test_fraction", test_fraction},
          {"selection_folds", selection_folds},
          {"tuning_folds", tuning_folds},
          {"k_grid", k_grid},
          {"models", m},
          {"grids", grids},
          {"tune", tune},
          {"strategy", std::string(imbalance_strategy_name(strategy))},
          {"resampler", std::string(rebalance_strategy_name(rebalance.strategy))},
          {"oversample_fraction", rebalance.oversample_fraction},
          {"majority_per_minority", rebalance.majority_per_minority},
          {"smote_neighbors", rebalance.smote_neighbors},
          {"ensemble_members", ensemble_members},
          {"seed", seed},
          {"threads", threads}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("pipeline config must be an object");
  PipelineConfig c;
  static const std::set<std::string> known = {
      "remove_outliers", "contamination", "isolation_trees", "isolation_subsample", "test_fraction",
      "selection_folds", "tuning_folds",  "k_grid",          "models",              "grids",
      "tune",            "strategy",      "resampler",       "oversample_fraction", "majority_per_minority",
      "smote_neighbors", "ensemble_members", "seed",         "threads"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw UsageError("unknown pipeline setting '" + key + "'");
  try {
    c.remove_outliers = j.value("remove_outliers", c.remove_outliers);
    c.outliers.contamination = j.value("contamination", c.outliers.contamination);
    c.outliers.n_trees = j.value("isolation_trees", c.outliers.n_trees);
    c.outliers.subsample = j.value("isolation_subsample", c.outliers.subsample);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.selection_folds = j.value("selection_folds", c.selection_folds);
    c.tuning_folds = j.value("tuning_folds", c.tuning_folds);
    if (j.contains("k_grid")) c.k_grid = j.at("k_grid").get<std::vector<std::size_t>>();
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    if (j.contains("grids")) {
      for (const auto& [name, grid] : j.at("grids").items()) c.grids[name] = grid;
    }
    c.tune = j.value("tune", c.tune);
    if (j.contains("strategy")) c.strategy = parse_imbalance_strategy(j.at("strategy").get<std::string>());
    if (j.contains("resampler")) c.rebalance.strategy = parse_rebalance_strategy(j.at("resampler").get<std::string>());
    c.rebalance.oversample_fraction = j.value("oversample_fraction", c.rebalance.oversample_fraction);
    c.rebalance.majority_per_minority = j.value("majority_per_minority", c.rebalance.majority_per_minority);
    c.rebalance.smote_neighbors = j.value("smote_neighbors", c.rebalance.smote_neighbors);
    c.ensemble_members = j.value("ensemble_members", c.ensemble_members);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid pipeline config: ") + e.what());
  }
  c.outliers.seed = c.seed;
  c.validate();
  return c;
}

Candidate candidate_for(ModelKind kind, std::size_t top_k, const PipelineConfig& config, std::uint64_t seed) {
  const auto s = config.strategy;
  const bool resample = s == ImbalanceStrategy::Resampling || s == ImbalanceStrategy::ResamplingCostSensitive;
  const bool cost = s == ImbalanceStrategy::CostSensitive || s == ImbalanceStrategy::ResamplingCostSensitive ||
                    s == ImbalanceStrategy::EnsembleCostSensitive;
  const bool vote = s == ImbalanceStrategy::Ensemble || s == ImbalanceStrategy::EnsembleResampling ||
                    s == ImbalanceStrategy::EnsembleCostSensitive;
  Candidate c;
  c.spec.kind = kind;
  c.spec.seed = seed;
  c.spec.params = default_hyperparams(kind);
  c.options = options_for(kind, top_k, config.rebalance);
  if (!resample) c.options.rebalance.strategy = RebalanceStrategy::None;
  if (cost) c.spec.weighting.mode = ClassWeighting::Mode::Balanced;
  if (vote) {
    c.spec.ensemble_size = config.ensemble_members;
    c.spec.member_resampling = s == ImbalanceStrategy::EnsembleResampling && !is_ensemble_kind(kind);
  }
  return c;
}

json PreparedSplit::to_json() const {
  return {{"outliers", outliers}, {"train", train}, {"test", test}, {"outlier_threshold", outlier_threshold}};
}

PreparedSplit PreparedSplit::from_json(const json& j) {
  PreparedSplit s;
  try {
    s.outliers = j.at("outliers").get<std::vector<std::size_t>>();
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
    s.outlier_threshold = j.value("outlier_threshold", 0.0);
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt split record: ") + e.what());
  }
  return s;
}

PreparedSplit prepare_split(const Matrix& X, const Labels& y, const PipelineConfig& config) {
  if (X.rows() != y.size()) throw UsageError("feature rows and labels differ in count");
  PreparedSplit out;
  std::vector<std::size_t> inliers(X.rows());
  std::iota(inliers.begin(), inliers.end(), 0);
  if (config.remove_outliers && config.outliers.contamination > 0) {
    auto params = config.outliers;
    params.seed = derive_seed(config.seed, 0x150);
    auto det = detect_outliers(X, params);
    out.outliers = det.outliers;
    out.outlier_threshold = det.threshold;
    inliers = det.inliers;
  }
  auto y_in = select_labels(y, inliers);
  if (!both_classes(y_in)) throw DataError("the cohort has a single class; nothing to learn");
  auto split = stratified_split(y_in, config.test_fraction, derive_seed(config.seed, kSplitStream));
  for (auto i : split.train) out.train.push_back(inliers[i]);
  for (auto i : split.test) out.test.push_back(inliers[i]);
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

json SelectionResult::to_json() const {
  return {{"k_values", k_values}, {"mean_f1", mean_f1}, {"best_k", best_k}};
}

json TrainingOutcome::to_json() const {
  json j;
  j["model"] = std::string(model_kind_name(kind));
  j["spec"] = model.spec.to_json();
  j["p_used"] = model.selected.size();
  j["selected_features"] = model.selected_names();
  j["selection"] = selection ? selection->to_json() : json();
  j["selection_folds"] = selection_folds;
  j["tuning_folds"] = tuning_folds;
  j["tuning"] = tuning.to_json();
  j["class_counts_before"] = counts_json(model.class_counts_before);
  j["class_counts_after"] = counts_json(model.class_counts_after);
  return j;
}

TrainingOutcome train_with_protocol(ModelKind kind, const Matrix& X_train, const Labels& y_train,
                                    const std::vector<std::string>& names, const PipelineConfig& config,
                                    std::uint64_t seed) {
  TrainingOutcome out;
  out.kind = kind;
  const std::uint64_t model_seed = derive_seed(seed, kModelStream, static_cast<std::uint64_t>(kind));
  const std::size_t p = X_train.cols();

  std::size_t top_k = 0;
  if (!is_ensemble_kind(kind)) {
    auto plan = stratified_kfold(y_train, config.selection_folds, derive_seed(seed, kSelectionStream));
    SelectionResult sel;
    std::vector<Candidate> candidates;
    for (auto k : config.k_grid) {
      std::size_t kk = k >= p ? 0 : k;
      if (std::find(sel.k_values.begin(), sel.k_values.end(), kk) != sel.k_values.end()) continue;
      sel.k_values.push_back(kk);
      candidates.push_back(candidate_for(kind, kk, config, model_seed));
    }
    auto scores = cross_validate(candidates, X_train, y_train, plan, config.threads);
    for (const auto& s : scores) sel.mean_f1.push_back(s.mean_f1);
    sel.best_k = sel.k_values[best_candidate(scores)];
    top_k = sel.best_k;
    out.selection = sel;
    out.selection_folds = plan.k;
  }

  auto tuning_plan = stratified_kfold(y_train, config.tuning_folds, derive_seed(seed, kTuningStream));
  out.tuning_folds = tuning_plan.k;
  auto base = candidate_for(kind, top_k, config, model_seed);
  std::vector<Hyperparams> grid{Hyperparams::object()};
  const std::string name(model_kind_name(kind));
  if (config.tune && config.grids.contains(name)) grid = expand_grid(config.grids.at(name));
  out.tuning = grid_search(base.spec, grid, X_train, y_train, tuning_plan, base.options, config.threads);

  ModelSpec final_spec = base.spec;
  final_spec.params = out.tuning.best_params();
  out.model = train_model(final_spec, X_train, y_train, base.options, names);
  out.model.metadata = {{"chosen_k", top_k},
                        {"strategy", std::string(imbalance_strategy_name(config.strategy))},
                        {"fold_f1", out.chosen_scores().fold_f1},
                        {"fold_micro_f1", out.chosen_scores().fold_micro_f1},
                        {"selection", out.selection ? out.selection->to_json() : json()}};
  return out;
}

EvalReport evaluate_trained(const TrainedModel& model, const CandidateScore& folds, const Matrix& X_test,
                            const Labels& y_test) {
  auto scores = model.decision_scores(X_test);
  auto pred = model.predict(X_test);
  return make_report(y_test, pred, scores, folds.fold_f1, folds.fold_micro_f1, model.selected.size());
}

Prediction baseline_predict(BaselineKind kind, const Matrix& X_train, const Labels& y_train, const Matrix& X_test,
                            const std::vector<std::string>& names, std::uint64_t seed) {
  Prediction out;
  TrainOptions plain;
  plain.rebalance.strategy = RebalanceStrategy::None;
  ModelSpec spec;
  spec.seed = seed;
  auto fit_on = [&](const std::vector<std::size_t>& cols) {
    auto m = train_model(spec, X_train.select_cols(cols), y_train, plain);
    auto Xt = X_test.select_cols(cols);
    out.labels = m.predict(Xt);
    out.scores = m.decision_scores(Xt);
  };
  std::vector<std::size_t> all(X_train.cols());
  std::iota(all.begin(), all.end(), 0);
  switch (kind) {
    case BaselineKind::Stratified: {
      const double prior = positive_rate(y_train);
      Rng rng(seed);
      for (std::size_t i = 0; i < X_test.rows(); ++i) {
        int label = rng.bernoulli(prior) ? 1 : 0;
        out.labels.push_back(label);
        out.scores.push_back(label);
      }
      return out;
    }
    case BaselineKind::DtRatio:
    case BaselineKind::DtTrend:
      spec.kind = ModelKind::DT;
      spec.params = {{"max_depth", kBaselineTreeDepth}};
      fit_on({column_of(names, kind == BaselineKind::DtRatio ? kRatioFeature : kTrendFeature)});
      return out;
    case BaselineKind::NbNfe:
      spec.kind = ModelKind::NB;
      fit_on(all);
      return out;
    case BaselineKind::DtNfe:
      spec.kind = ModelKind::DT;
      fit_on(all);
      return out;
  }
  throw UsageError("unknown baseline");
}

BaselineResult run_baseline(BaselineKind kind, const Matrix& X_train, const Labels& y_train, const Matrix& X_test,
                            const Labels& y_test, const std::vector<std::string>& names, const PipelineConfig& config) {
  const std::uint64_t seed = derive_seed(config.seed, kBaselineStream, static_cast<std::uint64_t>(kind));
  auto plan = stratified_kfold(y_train, config.tuning_folds, derive_seed(config.seed, kTuningStream));
  std::vector<double> fold_f1, fold_micro;
  for (std::size_t f = 0; f < plan.k; ++f) {
    auto tr = plan.train(f);
    auto yv = select_labels(y_train, plan.test[f]);
    auto pred = baseline_predict(kind, X_train.select_rows(tr), select_labels(y_train, tr),
                                 X_train.select_rows(plan.test[f]), names, derive_seed(seed, f + 1));
    auto c = confusion(yv, pred.labels);
    fold_f1.push_back(f1(c));
    fold_micro.push_back(micro_f1(c));
  }
  auto pred = baseline_predict(kind, X_train, y_train, X_test, names, seed);
  std::size_t p = kind == BaselineKind::Stratified ? 0
                  : (kind == BaselineKind::DtRatio || kind == BaselineKind::DtTrend) ? 1
                                                                                      : X_train.cols();
  return {kind, make_report(y_test, pred.labels, pred.scores, fold_f1, fold_micro, p)};
}

TrainingOutcome restore_outcome(ModelKind kind, TrainedModel model, const PipelineConfig& config) {
  TrainingOutcome out;
  out.kind = kind;
  const auto& meta = model.metadata;
  if (!meta.contains("fold_f1") || !meta.contains("fold_micro_f1"))
    throw DataError("model metadata lacks the tuning fold scores");
  CandidateScore chosen;
  chosen.fold_f1 = meta.at("fold_f1").get<std::vector<double>>();
  chosen.fold_micro_f1 = meta.at("fold_micro_f1").get<std::vector<double>>();
  chosen.mean_f1 = stats::mean(chosen.fold_f1);
  out.tuning.points = {model.spec.params};
  out.tuning.scores = {chosen};
  out.tuning_folds = chosen.fold_f1.size();
  if (meta.contains("selection") && !meta.at("selection").is_null()) {
    const auto& sj = meta.at("selection");
    SelectionResult sel;
    sel.k_values = sj.at("k_values").get<std::vector<std::size_t>>();
    sel.mean_f1 = sj.at("mean_f1").get<std::vector<double>>();
    sel.best_k = sj.at("best_k").get<std::size_t>();
    out.selection = sel;
    out.selection_folds = config.selection_folds;
  }
  out.model = std::move(model);
  return out;
}

namespace {

json model_result_json(const ModelResult& m) {
  return {{"model", std::string(model_kind_name(m.outcome.kind))},
          {"training", m.outcome.to_json()},
          {"test", m.report.to_json(true)}};
}

}  // namespace

const ModelResult* ExperimentResult::find(ModelKind kind) const {
  for (const auto& m : models)
    if (m.outcome.kind == kind) return &m;
  return nullptr;
}

const BaselineResult* ExperimentResult::find(BaselineKind kind) const {
  for (const auto& b : baselines)
    if (b.kind == kind) return &b;
  return nullptr;
}

json ExperimentResult::to_json() const {
  json models_j = json::array(), baselines_j = json::array();
  for (const auto& m : models) models_j.push_back(model_result_json(m));
  for (const auto& b : baselines) {
    baselines_j.push_back({{"baseline", std::string(baseline_name(b.kind))}, {"test", b.report.to_json(true)}});
  }
  return {{"protocol", protocol}, {"split", split.to_json()}, {"models", models_j}, {"baselines", baselines_j}};
}

json protocol_manifest(const ExperimentResult& r, const PipelineConfig& config, const Labels& y,
                       std::size_t n_features) {
  json models = json::object();
  for (const auto& m : r.models) {
    const auto& before = m.outcome.model.class_counts_before;
    const auto& after = m.outcome.model.class_counts_after;
    const double total_after = static_cast<double>(after.majority + after.minority);
    models[std::string(model_kind_name(m.outcome.kind))] = {
        {"p_used", m.outcome.model.selected.size()},
        {"chosen_k", m.outcome.selection ? json(m.outcome.selection->best_k) : json()},
        {"feature_selection", m.outcome.selection.has_value()},
        {"selection_folds", m.outcome.selection_folds},
        {"tuning_folds", m.outcome.tuning_folds},
        {"resampler", std::string(rebalance_strategy_name(candidate_for(m.outcome.kind, 0, config, 0).options.rebalance.strategy))},
        {"rebalanced", before.majority != after.majority || before.minority != after.minority},
        {"class_counts_before", counts_json(before)},
        {"class_counts_after", counts_json(after)},
        {"minority_share_after", total_after > 0 ? static_cast<double>(after.minority) / total_after : 0.0},
        {"ensemble_members", m.outcome.model.spec.ensemble_size},
        {"class_weighting", m.outcome.model.spec.weighting.to_json()},
        {"hyperparameters", m.outcome.model.spec.params}};
  }
  auto y_train = select_labels(y, r.split.train), y_test = select_labels(y, r.split.test);
  return {{"rows", y.size()},
          {"features", n_features},
          {"outlier_removal",
           {{"enabled", config.remove_outliers},
            {"contamination", config.outliers.contamination},
            {"removed", r.split.outliers.size()}}},
          {"split",
           {{"test_fraction", config.test_fraction},
            {"stratified", true},
            {"train", r.split.train.size()},
            {"test", r.split.test.size()},
            {"train_positive_rate", positive_rate(y_train)},
            {"test_positive_rate", positive_rate(y_test)}}},
          {"selection_cv_folds", config.selection_folds},
          {"tuning_cv_folds", config.tuning_folds},
          {"k_grid", config.k_grid},
          {"strategy", std::string(imbalance_strategy_name(config.strategy))},
          {"target_majority_per_minority", config.rebalance.majority_per_minority},
          {"seed", config.seed},
          {"models", models}};
}

ExperimentResult run_experiment_on_split(const Matrix& X, const Labels& y, const std::vector<std::string>& names,
                                         const PipelineConfig& config, const PreparedSplit& split,
                                         bool with_baselines) {
  config.validate();
  ExperimentResult r;
  r.split = split;
  const Matrix X_train = X.select_rows(split.train), X_test = X.select_rows(split.test);
  const Labels y_train = select_labels(y, split.train), y_test = select_labels(y, split.test);
  for (auto kind : config.models) {
    log::info("training model", {{"model", std::string(model_kind_name(kind))}});
    ModelResult m;
    m.outcome = train_with_protocol(kind, X_train, y_train, names, config, config.seed);
    m.report = evaluate_trained(m.outcome.model, m.outcome.chosen_scores(), X_test, y_test);
    r.models.push_back(std::move(m));
  }
  if (with_baselines) {
    for (auto b : kAllBaselines) r.baselines.push_back(run_baseline(b, X_train, y_train, X_test, y_test, names, config));
  }
  r.protocol = protocol_manifest(r, config, y, X.cols());
  return r;
}

ExperimentResult run_experiment(const Matrix& X, const Labels& y, const std::vector<std::string>& names,
                                const PipelineConfig& config, bool with_baselines) {
  config.validate();
  return run_experiment_on_split(X, y, names, config, prepare_split(X, y, config), with_baselines);
}

json LoocvResult::to_json() const {
  json rounds_j = json::array();
  for (const auto& r : rounds) {
    json reps = json::object();
    for (const auto& [kind, rep] : r.reports) reps[std::string(model_kind_name(kind))] = rep.to_json();
    rounds_j.push_back({{"group", r.group},
                        {"train_users", r.train_users},
                        {"test_users", r.test_users},
                        {"shared_users", r.shared_users},
                        {"defined", r.defined},
                        {"reports", reps}});
  }
  json agg = json::object();
  for (const auto& [kind, metrics] : aggregate) {
    json m = json::object();
    for (const auto& [name, s] : metrics) m[name] = {{"mean", s.mean}, {"std", s.std}, {"rounds", s.n}};
    agg[std::string(model_kind_name(kind))] = m;
  }
  return {{"rounds", rounds_j}, {"aggregate", agg}, {"overlap", overlap.to_json()}};
}

LoocvResult run_loocv(const Matrix& X, const Labels& y, const GroupAssignment& groups,
                      const std::vector<std::string>& names, const PipelineConfig& config) {
  config.validate();
  if (groups.groups.size() < 2) throw UsageError("leave-one-group-out needs at least two groups");
  if (X.rows() != y.size()) throw UsageError("feature rows and labels differ in count");
  LoocvResult result;
  result.overlap = overlap_matrix(groups);

  for (std::size_t g = 0; g < groups.groups.size(); ++g) {
    const std::uint64_t seed = config.seed ^ static_cast<std::uint64_t>(g);
    LoocvRound round;
    round.group = groups.groups[g];
    const auto& test = groups.members[g];
    std::set<std::size_t> test_set(test.begin(), test.end()), train_set;
    for (std::size_t h = 0; h < groups.groups.size(); ++h) {
      if (h == g) continue;
      for (auto u : groups.members[h])
        if (!test_set.count(u)) train_set.insert(u);
    }
    std::vector<std::size_t> train(train_set.begin(), train_set.end());
    std::vector<std::size_t> shared;
    std::set_intersection(train.begin(), train.end(), test.begin(), test.end(), std::back_inserter(shared));
    round.shared_users = shared.size();
    round.test_users = test.size();

    if (config.remove_outliers && config.outliers.contamination > 0 && train.size() > 2) {
      auto params = config.outliers;
      params.seed = derive_seed(seed, 0x150);
      auto det = detect_outliers(X.select_rows(train), params);
      std::vector<std::size_t> kept;
      for (auto i : det.inliers) kept.push_back(train[i]);
      train = std::move(kept);
    }
    round.train_users = train.size();
    auto y_train = select_labels(y, train), y_test = select_labels(y, test);
    if (!both_classes(y_train)) throw DataError("training users of round '" + round.group + "' have a single class");
    round.defined = both_classes(y_test);
    auto X_train = X.select_rows(train), X_test = X.select_rows(test);
    for (auto kind : config.models) {
      auto outcome = train_with_protocol(kind, X_train, y_train, names, config, seed);
      round.reports.emplace_back(kind, evaluate_trained(outcome.model, outcome.chosen_scores(), X_test, y_test));
    }
    log::info("leave-one-group-out round done", {{"group", round.group}, {"defined", round.defined ? "yes" : "no"}});
    result.rounds.push_back(std::move(round));
  }

  for (std::size_t m = 0; m < config.models.size(); ++m) {
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : result.rounds) {
      if (!r.defined) continue;
      const auto& t = r.reports[m].second.test;
      values["precision"].push_back(t.precision);
      values["recall"].push_back(t.recall);
      values["f1"].push_back(t.f1);
      values["auc"].push_back(t.auc);
      values["micro_f1"].push_back(t.micro_f1);
    }
    std::map<std::string, MetricSummary> summary;
    for (const auto& [name, v] : values) summary[name] = {stats::mean(v), stats::sstdev(v), v.size()};
    result.aggregate.emplace_back(config.models[m], std::move(summary));
  }
  return result;
}

json ActivityStudy::to_json() const {
  json bins_j = json::array();
  for (const auto& b : bins) {
    json e = {{"bin", b.label}, {"users", b.users}};
    if (b.experiment) e["experiment"] = b.experiment->to_json();
    else e["skipped"] = b.skipped_reason;
    bins_j.push_back(std::move(e));
  }
  return {{"plan", plan.to_json()}, {"bins", bins_j}};
}

ActivityStudy run_activity_bins(const Matrix& X, const Labels& y, std::span<const double> comment_counts,
                                const std::vector<std::string>& names, const PipelineConfig& config) {
  if (comment_counts.size() != X.rows()) throw UsageError("comment counts and feature rows differ in count");
  ActivityStudy study;
  study.plan = activity_bins(comment_counts);
  auto rows = study.plan.assign(comment_counts);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    ActivityBinResult r;
    r.label = std::string(kActivityBinLabels[b]);
    r.users = rows[b].size();
    auto yb = select_labels(y, rows[b]);
    if (!both_classes(yb)) {
      r.skipped_reason = "bin has fewer than two classes";
    } else {
      try {
        r.experiment = run_experiment(X.select_rows(rows[b]), yb, names, config, true);
      } catch (const DataError& e) {
        r.skipped_reason = e.what();
      } catch (const UsageError& e) {
        r.skipped_reason = e.what();
      }
    }
    if (!r.experiment) log::warn("activity bin skipped", {{"bin", r.label}, {"reason", r.skipped_reason}});
    study.bins.push_back(std::move(r));
  }
  return study;
}

std::vector<std::pair<ImbalanceStrategy, ModelResult>> run_imbalance_ablation(
    const Matrix& X, const Labels& y, const std::vector<std::string>& names, const PipelineConfig& config,
    ModelKind kind, std::vector<ImbalanceStrategy> strategies) {
  config.validate();
  auto split = prepare_split(X, y, config);
  std::vector<std::pair<ImbalanceStrategy, ModelResult>> out;
  for (auto s : strategies) {
    PipelineConfig c = config;
    c.strategy = s;
    c.models = {kind};
    auto r = run_experiment_on_split(X, y, names, c, split, false);
    out.emplace_back(s, std::move(r.models.front()));
  }
  return out;
}

}  // namespace abandon
