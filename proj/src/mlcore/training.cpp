#include "abandon/mlcore/training.hpp"

#include <fstream>
#include <numeric>

#include "abandon/common/error.hpp"
#include "abandon/common/parallel.hpp"
#include "abandon/common/rng.hpp"
#include "abandon/evaluate/metrics.hpp"

namespace abandon {

using nlohmann::json;

TrainOptions options_for(ModelKind kind, std::size_t top_k, const RebalanceParams& rebalance) {
  TrainOptions o;
  o.rebalance = rebalance;
  o.top_k = top_k;
  if (is_ensemble_kind(kind)) {
    o.top_k = 0;
    o.rebalance.strategy = RebalanceStrategy::None;
  }
  return o;
}

Matrix TrainedModel::transform(const Matrix& X) const {
  if (X.cols() != input_names.size() && !input_names.empty()) {
    throw UsageError("model expects " + std::to_string(input_names.size()) + " input features, got " +
                     std::to_string(X.cols()));
  }
  return scaler.apply(X.select_cols(selected));
}

std::vector<double> TrainedModel::decision_scores(const Matrix& X) const {
  return classifier->decision_scores(transform(X));
}

Labels TrainedModel::predict(const Matrix& X) const { return classifier->predict(transform(X)); }

std::vector<std::string> TrainedModel::selected_names() const {
  std::vector<std::string> out;
  for (auto i : selected) out.push_back(i < input_names.size() ? input_names[i] : "f" + std::to_string(i));
  return out;
}

void TrainedModel::save(const std::filesystem::path& path) const {
  if (!classifier) throw UsageError("cannot save an untrained model");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  BinaryWriter w(out);
  w.write_bytes("ABMD", 4);
  w.write<std::uint32_t>(kModelFormatVersion);
  w.write<std::uint64_t>(input_names.size());
  for (const auto& n : input_names) w.write_string(n);
  w.write_sizes(selected);
  scaler.save(w);
  w.write<std::uint64_t>(class_counts_before.majority);
  w.write<std::uint64_t>(class_counts_before.minority);
  w.write<std::uint64_t>(class_counts_after.majority);
  w.write<std::uint64_t>(class_counts_after.minority);
  w.write_string(metadata.dump());
  classifier->save(w);
  if (!out) throw IoError("failed writing " + path.string());
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model " + path.string());
  BinaryReader r(in);
  r.expect_magic("ABMD", "model file");
  auto version = r.read<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw DataError("model " + path.string() + " was written by a " + (version > kModelFormatVersion ? "newer" : "older") +
                    " release (format " + std::to_string(version) + ", this build reads " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  TrainedModel m;
  auto n = r.read<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) m.input_names.push_back(r.read_string());
  m.selected = r.read_sizes();
  m.scaler = ScalerParams::load(r);
  m.class_counts_before.majority = r.read<std::uint64_t>();
  m.class_counts_before.minority = r.read<std::uint64_t>();
  m.class_counts_after.majority = r.read<std::uint64_t>();
  m.class_counts_after.minority = r.read<std::uint64_t>();
  m.metadata = json::parse(r.read_string(), nullptr, false);
  if (m.metadata.is_discarded()) throw DataError("corrupt model metadata in " + path.string());
  m.classifier = load_classifier(r);
  m.spec = m.classifier->spec();
  if (m.scaler.mean.size() != m.selected.size()) throw DataError("corrupt model " + path.string());
  return m;
}

TrainedModel train_model(const ModelSpec& spec, const Matrix& X, const Labels& y, const TrainOptions& options,
                         const std::vector<std::string>& names) {
  if (!names.empty() && names.size() != X.cols()) throw UsageError("feature name count mismatch");
  TrainedModel m;
  m.spec = spec;
  m.input_names = names;
  auto full_scaler = ScalerParams::fit(X);
  Matrix scaled = full_scaler.apply(X);
  if (options.top_k > 0 && options.top_k < X.cols()) {
    m.selected = select_top_k(anova_f(scaled, y), options.top_k);
    scaled = scaled.select_cols(m.selected);
  } else {
    m.selected.resize(X.cols());
    std::iota(m.selected.begin(), m.selected.end(), 0);
  }
  for (auto i : m.selected) {
    m.scaler.mean.push_back(full_scaler.mean[i]);
    m.scaler.stddev.push_back(full_scaler.stddev[i]);
  }
  auto rs = rebalance(scaled, y, options.rebalance, derive_seed(spec.seed, 0x7265));
  m.class_counts_before = rs.before;
  m.class_counts_after = rs.after;
  m.classifier = make_classifier(spec);
  m.classifier->fit(rs.X, rs.y);
  m.spec = m.classifier->spec();
  return m;
}

double score_fold(const ModelSpec& spec, const Matrix& X_train, const Labels& y_train, const Matrix& X_val,
                  const Labels& y_val, const TrainOptions& options) {
  return f1(confusion(y_val, predict_fold(spec, X_train, y_train, X_val, options)));
}

Labels predict_fold(const ModelSpec& spec, const Matrix& X_train, const Labels& y_train, const Matrix& X_val,
                    const TrainOptions& options) {
  return train_model(spec, X_train, y_train, options).predict(X_val);
}

std::vector<CandidateScore> cross_validate(const std::vector<Candidate>& candidates, const Matrix& X, const Labels& y,
                                           const FoldPlan& plan, int threads) {
  const std::size_t k = plan.test.size();
  std::vector<std::vector<std::size_t>> train(k);
  for (std::size_t f = 0; f < k; ++f) train[f] = plan.train(f);
  std::vector<Confusion> cell(candidates.size() * k);
  parallel_for(cell.size(), threads, [&](std::size_t idx) {
    std::size_t c = idx / k, f = idx % k;
    auto yval = select_labels(y, plan.test[f]);
    cell[idx] = confusion(yval, predict_fold(candidates[c].spec, X.select_rows(train[f]), select_labels(y, train[f]),
                                             X.select_rows(plan.test[f]), candidates[c].options));
  });
  std::vector<CandidateScore> out(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (std::size_t f = 0; f < k; ++f) {
      out[c].fold_f1.push_back(f1(cell[c * k + f]));
      out[c].fold_micro_f1.push_back(micro_f1(cell[c * k + f]));
    }
    out[c].mean_f1 = std::accumulate(out[c].fold_f1.begin(), out[c].fold_f1.end(), 0.0) / static_cast<double>(k);
  }
  return out;
}

std::size_t best_candidate(const std::vector<CandidateScore>& scores) {
  if (scores.empty()) throw UsageError("no candidates to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].mean_f1 > scores[best].mean_f1) best = i;
  }
  return best;
}

json GridSearchResult::to_json() const {
  json pts = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    pts.push_back({{"params", points[i]},
                   {"mean_f1", scores[i].mean_f1},
                   {"fold_f1", scores[i].fold_f1},
                   {"fold_micro_f1", scores[i].fold_micro_f1}});
  }
  return {{"points", pts}, {"best", best}, {"best_params", points.empty() ? json() : points[best]}};
}

GridSearchResult grid_search(const ModelSpec& base, const std::vector<Hyperparams>& grid, const Matrix& X,
                             const Labels& y, const FoldPlan& plan, const TrainOptions& options, int threads) {
  if (grid.empty()) throw UsageError("empty hyperparameter grid");
  GridSearchResult result;
  std::vector<Candidate> candidates;
  for (const auto& point : grid) {
    Candidate c{base, options};
    Hyperparams merged = base.params.is_object() ? base.params : Hyperparams::object();
    for (const auto& [key, value] : point.items()) merged[key] = value;
    c.spec.params = with_defaults(base.kind, merged);
    result.points.push_back(c.spec.params);
    candidates.push_back(std::move(c));
  }
  result.scores = cross_validate(candidates, X, y, plan, threads);
  result.best = best_candidate(result.scores);
  return result;
}

}  // namespace abandon
