#include "abandon/importance/importance.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"
#include "abandon/common/parallel.hpp"
#include "abandon/common/rng.hpp"
#include "abandon/evaluate/metrics.hpp"
#include "abandon/evaluate/rank.hpp"

namespace abandon {

using nlohmann::json;

json PruneResult::to_json(const std::vector<std::string>& names) const {
  auto name = [&](std::size_t i) { return i < names.size() ? names[i] : "f" + std::to_string(i); };
  json kept = json::array(), gone = json::array();
  for (auto s : survivors) kept.push_back(name(s));
  for (const auto& d : dropped) gone.push_back({{"dropped", name(d.dropped)}, {"partner", name(d.kept)}, {"r", d.r}});
  return {{"survivors", kept}, {"dropped", gone}};
}

PruneResult prune_correlated(const Matrix& X, double threshold, std::uint64_t seed) {
  if (!(threshold >= 0 && threshold <= 1)) throw UsageError("correlation threshold must be in [0, 1]");
  const std::size_t p = X.cols();
  std::vector<std::vector<double>> cols(p);
  for (std::size_t f = 0; f < p; ++f) cols[f] = X.column(f);
  std::vector<char> alive(p, 1);
  Rng rng(seed);
  PruneResult out;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p && alive[i]; ++j) {
      if (!alive[j]) continue;
      double r = pearson_r(cols[i], cols[j]).value;
      if (std::fabs(r) <= threshold) continue;
      const bool drop_first = rng.bernoulli(0.5);
      const std::size_t gone = drop_first ? i : j, kept = drop_first ? j : i;
      alive[gone] = 0;
      out.dropped.push_back({gone, kept, r});
    }
  }
  for (std::size_t f = 0; f < p; ++f)
    if (alive[f]) out.survivors.push_back(f);
  return out;
}

PermutationImportance permutation_importance(const LabelFn& predict, const Matrix& X, const Labels& y,
                                             std::size_t n_repeats, std::uint64_t seed, int threads) {
  if (X.rows() != y.size()) throw UsageError("permutation importance: rows and labels differ in count");
  if (n_repeats == 0) throw UsageError("permutation importance needs at least one repeat");
  PermutationImportance out;
  out.baseline = f1(confusion(y, predict(X)));
  const std::size_t p = X.cols();
  out.mean.assign(p, 0.0);
  out.std.assign(p, 0.0);
  parallel_for(p, threads, [&](std::size_t f) {
    Rng rng(derive_seed(seed, f));
    Matrix shuffled = X;
    auto col = X.column(f);
    std::vector<double> drops;
    for (std::size_t r = 0; r < n_repeats; ++r) {
      auto perm = col;
      rng.shuffle(perm);
      for (std::size_t i = 0; i < X.rows(); ++i) shuffled(i, f) = perm[i];
      drops.push_back(out.baseline - f1(confusion(y, predict(shuffled))));
    }
    double m = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(n_repeats);
    double v = 0;
    for (double d : drops) v += (d - m) * (d - m);
    out.mean[f] = m;
    out.std[f] = std::sqrt(v / static_cast<double>(n_repeats));
  });
  return out;
}

PermutationImportance permutation_importance(const TrainedModel& model, const Matrix& X, const Labels& y,
                                             std::size_t n_repeats, std::uint64_t seed, int threads) {
  if (!model.classifier || !model.classifier->fitted()) throw UsageError("permutation importance needs a fitted model");
  return permutation_importance([&](const Matrix& m) { return model.predict(m); }, X, y, n_repeats, seed, threads);
}

Matrix mc_shapley(const ScoreFn& f, const Matrix& points, const Matrix& background, std::size_t n_permutations,
                  std::uint64_t seed, int threads) {
  if (background.rows() == 0) throw UsageError("Shapley estimation needs a non-empty background sample");
  if (background.cols() != points.cols()) throw UsageError("background and points differ in width");
  if (n_permutations == 0) throw UsageError("Shapley estimation needs at least one permutation");
  const std::size_t p = points.cols();
  Matrix contributions(points.rows(), p, 0.0);
  parallel_for(points.rows(), threads, [&](std::size_t d) {
    Rng rng(derive_seed(seed, d));
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    // Each sample evaluates the p + 1 hybrid rows in one batch.
    Matrix path(p + 1, p);
    std::vector<double> acc(p, 0.0);
    for (std::size_t s = 0; s < n_permutations; ++s) {
      rng.shuffle(order);
      auto z = background.row(rng.index(background.rows()));
      std::vector<double> cur(z.begin(), z.end());
      for (std::size_t c = 0; c < p; ++c) path(0, c) = cur[c];
      for (std::size_t k = 0; k < p; ++k) {
        cur[order[k]] = points(d, order[k]);
        for (std::size_t c = 0; c < p; ++c) path(k + 1, c) = cur[c];
      }
      auto v = f(path);
      for (std::size_t k = 0; k < p; ++k) acc[order[k]] += v[k + 1] - v[k];
    }
    for (std::size_t c = 0; c < p; ++c) contributions(d, c) = acc[c] / static_cast<double>(n_permutations);
  });
  return contributions;
}

std::vector<double> shapley_local_scores(const Matrix& contributions) {
  std::vector<double> out(contributions.cols(), 0.0);
  if (contributions.rows() == 0) return out;
  for (std::size_t i = 0; i < contributions.rows(); ++i)
    for (std::size_t c = 0; c < contributions.cols(); ++c) out[c] += std::fabs(contributions(i, c));
  for (auto& v : out) v /= static_cast<double>(contributions.rows());
  return out;
}

std::vector<double> fuse_global(const std::vector<std::vector<double>>& locals, const std::vector<double>& weights) {
  if (locals.empty()) throw UsageError("fusion needs at least one model");
  if (locals.size() != weights.size()) throw UsageError("one weight per model is required");
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw UsageError("model weights must be finite and non-negative");
    total += w;
  }
  if (total == 0) throw UsageError("model weights are all zero");
  const std::size_t p = locals.front().size();
  std::vector<double> out(p, 0.0);
  for (std::size_t m = 0; m < locals.size(); ++m) {
    if (locals[m].size() != p) throw UsageError("models report different feature counts");
    for (std::size_t f = 0; f < p; ++f) out[f] += weights[m] * locals[m][f];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> normalize_to_max(const std::vector<double>& scores) {
  double best = 0;
  for (double s : scores) best = std::max(best, s);
  std::vector<double> out(scores.size(), 0.0);
  if (best <= 0) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] == best ? 1.0 : scores[i] / best;
  return out;
}

std::vector<double> clip_negative(std::vector<double> scores) {
  for (auto& s : scores) s = std::max(0.0, s);
  return scores;
}

std::vector<ClassImportance> class_aggregate(const std::vector<double>& global_scores,
                                             const std::vector<std::string>& feature_classes) {
  if (global_scores.size() != feature_classes.size()) throw UsageError("one class per feature is required");
  std::vector<ClassImportance> out;
  for (std::size_t f = 0; f < global_scores.size(); ++f) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& c) { return c.name == feature_classes[f]; });
    if (it == out.end()) {
      out.push_back({feature_classes[f], 0, 0.0, 0.0});
      it = out.end() - 1;
    }
    ++it->features;
    it->aggregate += global_scores[f];
  }
  double best = 0;
  for (auto& c : out) {
    c.aggregate /= static_cast<double>(c.features);
    best = std::max(best, c.aggregate);
  }
  for (auto& c : out) c.normalized = best > 0 ? (c.aggregate == best ? 1.0 : c.aggregate / best) : 0.0;
  return out;
}

std::vector<std::string> ImportanceReport::ranking() const {
  std::vector<const ImportanceRecord*> order;
  for (const auto& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const ImportanceRecord* a, const ImportanceRecord* b) {
    if (a->normalized != b->normalized) return a->normalized > b->normalized;
    return a->feature < b->feature;
  });
  std::vector<std::string> out;
  for (const auto* r : order) out.push_back(r->feature);
  return out;
}

json ImportanceReport::to_json() const {
  json recs = json::array(), cls = json::array();
  for (const auto& r : records) {
    recs.push_back({{"feature", r.feature},
                    {"class", r.feature_class},
                    {"local", r.local},
                    {"global", r.global},
                    {"normalized", r.normalized}});
  }
  for (const auto& c : classes) {
    cls.push_back({{"class", c.name}, {"features", c.features}, {"aggregate", c.aggregate}, {"normalized", c.normalized}});
  }
  return {{"method", method},
          {"models", model_names},
          {"weights", model_weights},
          {"features", recs},
          {"classes", cls},
          {"ranking", ranking()}};
}

void ImportanceReport::write_csv(std::ostream& out) const {
  out << std::setprecision(9) << "feature,class";
  for (const auto& m : model_names) out << ',' << m;
  out << ",global,normalized\n";
  for (const auto& r : records) {
    out << r.feature << ',' << r.feature_class;
    for (double v : r.local) out << ',' << v;
    out << ',' << r.global << ',' << r.normalized << '\n';
  }
}

void ImportanceReport::write_class_csv(std::ostream& out) const {
  out << std::setprecision(9) << "class,features,aggregate,normalized\n";
  for (const auto& c : classes) out << c.name << ',' << c.features << ',' << c.aggregate << ',' << c.normalized << '\n';
}

ImportanceReport build_importance_report(const std::vector<std::string>& feature_names,
                                         const std::vector<std::string>& feature_classes,
                                         const std::vector<std::string>& model_names,
                                         const std::vector<std::vector<double>>& locals,
                                         const std::vector<double>& weights, std::string method) {
  if (feature_names.size() != feature_classes.size()) throw UsageError("one class per feature is required");
  if (model_names.size() != locals.size()) throw UsageError("one local score vector per model is required");
  std::vector<std::vector<double>> clipped;
  for (const auto& l : locals) {
    if (l.size() != feature_names.size()) throw UsageError("local scores do not match the feature list");
    clipped.push_back(clip_negative(l));
  }
  ImportanceReport rep;
  rep.method = std::move(method);
  rep.model_names = model_names;
  rep.model_weights = weights;
  auto global = fuse_global(clipped, weights);
  auto normalized = normalize_to_max(global);
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    ImportanceRecord r;
    r.feature = feature_names[f];
    r.feature_class = feature_classes[f];
    for (const auto& l : clipped) r.local.push_back(l[f]);
    r.global = global[f];
    r.normalized = normalized[f];
    rep.records.push_back(std::move(r));
  }
  rep.classes = class_aggregate(global, feature_classes);
  return rep;
}

std::string_view importance_method_name(ImportanceMethod m) {
  return m == ImportanceMethod::Permutation ? "permutation" : "shapley";
}

ImportanceMethod parse_importance_method(std::string_view name) {
  if (name == "permutation") return ImportanceMethod::Permutation;
  if (name == "shapley") return ImportanceMethod::Shapley;
  throw UsageError("unknown importance method '" + std::string(name) + "' (expected permutation or shapley)");
}

void ImportanceConfig::validate() const {
  if (!(correlation_threshold >= 0 && correlation_threshold <= 1))
    throw UsageError("correlation threshold must be in [0, 1]");
  if (n_repeats == 0) throw UsageError("importance repeats must be positive");
  if (shapley_permutations == 0 || shapley_points == 0 || shapley_background == 0)
    throw UsageError("Shapley permutations, points and background size must be positive");
}

json ImportanceConfig::to_json() const {
  return {{"method", importance_method_name(method)},
          {"correlation_threshold", correlation_threshold},
          {"repeats", n_repeats},
          {"shapley_permutations", shapley_permutations},
          {"shapley_points", shapley_points},
          {"shapley_background", shapley_background}};
}

ImportanceConfig ImportanceConfig::from_json(const json& j) {
  ImportanceConfig c;
  if (!j.is_object()) throw UsageError("importance settings must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "method") c.method = parse_importance_method(v.get<std::string>());
    else if (key == "correlation_threshold") c.correlation_threshold = v.get<double>();
    else if (key == "repeats") c.n_repeats = v.get<std::size_t>();
    else if (key == "shapley_permutations") c.shapley_permutations = v.get<std::size_t>();
    else if (key == "shapley_points") c.shapley_points = v.get<std::size_t>();
    else if (key == "shapley_background") c.shapley_background = v.get<std::size_t>();
    else throw UsageError("unknown importance setting '" + key + "'");
  }
  c.validate();
  return c;
}

json ImportanceRun::to_json(const std::vector<std::string>& all_names) const {
  return {{"pruning", pruning.to_json(all_names)}, {"features", pruned_names}, {"importance", report.to_json()}};
}

namespace {

constexpr std::uint64_t kPruneStream = 0x9a0e;
constexpr std::uint64_t kPermutationStream = 0x9e7;
constexpr std::uint64_t kShapleyStream = 0x5ab1;

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (k >= n) return rows;
  Rng rng(seed);
  rng.shuffle(rows);
  rows.resize(k);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

ImportanceRun run_importance(const Matrix& X, const Labels& y, const std::vector<std::string>& names,
                             const std::vector<std::string>& feature_classes, const PipelineConfig& pipeline,
                             const ImportanceConfig& config) {
  pipeline.validate();
  config.validate();
  if (names.size() != X.cols() || feature_classes.size() != X.cols())
    throw UsageError("feature names and classes must match the matrix width");
  ImportanceRun run;
  run.split = prepare_split(X, y, pipeline);
  const Matrix train_all = X.select_rows(run.split.train);
  run.pruning = prune_correlated(train_all, config.correlation_threshold, derive_seed(pipeline.seed, kPruneStream));
  const auto& keep = run.pruning.survivors;
  std::vector<std::string> classes;
  for (auto f : keep) {
    run.pruned_names.push_back(names[f]);
    classes.push_back(feature_classes[f]);
  }
  log::info("pruned correlated features",
            {{"kept", std::to_string(keep.size())}, {"dropped", std::to_string(run.pruning.dropped.size())}});
  const Matrix X_train = train_all.select_cols(keep);
  const Matrix X_test = X.select_rows(run.split.test).select_cols(keep);
  const Labels y_train = select_labels(y, run.split.train), y_test = select_labels(y, run.split.test);

  std::vector<std::string> model_names;
  std::vector<std::vector<double>> locals;
  std::vector<double> weights;
  for (auto kind : pipeline.models) {
    log::info("importance model", {{"model", std::string(model_kind_name(kind))}});
    auto outcome = train_with_protocol(kind, X_train, y_train, run.pruned_names, pipeline, pipeline.seed);
    const auto& model = outcome.model;
    const double weight = f1(confusion(y_test, model.predict(X_test)));
    const auto stream = derive_seed(pipeline.seed, static_cast<std::uint64_t>(kind));
    std::vector<double> local;
    if (config.method == ImportanceMethod::Permutation) {
      local = permutation_importance(model, X_test, y_test, config.n_repeats, derive_seed(stream, kPermutationStream),
                                     pipeline.threads)
                  .mean;
    } else {
      const auto seed = derive_seed(stream, kShapleyStream);
      const Matrix points = X_test.select_rows(sample_rows(X_test.rows(), config.shapley_points, seed));
      const Matrix background =
          X_train.select_rows(sample_rows(X_train.rows(), config.shapley_background, derive_seed(seed, 1)));
      auto contributions = mc_shapley([&](const Matrix& m) { return model.decision_scores(m); }, points, background,
                                      config.shapley_permutations, derive_seed(seed, 2), pipeline.threads);
      local = shapley_local_scores(contributions);
    }
    model_names.emplace_back(model_kind_name(kind));
    locals.push_back(std::move(local));
    weights.push_back(weight);
  }
  run.report = build_importance_report(run.pruned_names, classes, model_names, locals, weights,
                                       std::string(importance_method_name(config.method)));
  return run;
}

}  // namespace abandon
