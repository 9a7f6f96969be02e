#include "abandon/mlcore/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "abandon/common/error.hpp"
#include "abandon/common/rng.hpp"
#include "abandon/mlcore/preprocess.hpp"

namespace abandon {

using nlohmann::json;

Classifier::Classifier(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.params = with_defaults(spec_.kind, spec_.params);
}

void Classifier::fit(const Matrix& X, const Labels& y) {
  auto cw = spec_.weighting.resolve(y);
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = cw[y[i] == 1 ? 1 : 0];
  fit_weighted(X, y, w);
}

Labels Classifier::predict(const Matrix& X) const {
  auto s = decision_scores(X);
  Labels out(s.size());
  const double t = threshold();
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] > t ? 1 : 0;
  return out;
}

void Classifier::require_fitted() const {
  if (!fitted_) throw UsageError(std::string(model_kind_name(spec_.kind)) + " model used before fitting");
}

void Classifier::check_training_set(const Matrix& X, const Labels& y, std::span<const double> weights) const {
  if (X.rows() != y.size() || weights.size() != y.size()) throw UsageError("training data size mismatch");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 1) has1 = true;
    else if (v == 0) has0 = true;
    else throw UsageError("labels must be 0 or 1");
  }
  if (!has0 || !has1) throw DataError(std::string(model_kind_name(spec_.kind)) + " cannot train on a single-class set");
}

void Classifier::save(BinaryWriter& w) const {
  require_fitted();
  w.write_string(spec_.to_json().dump());
  w.write<std::uint64_t>(n_features_);
  save_state(w);
}

std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec) {
  if (spec.ensemble_size > 1) return std::make_unique<VoteEnsemble>(spec);
  switch (spec.kind) {
    case ModelKind::NB: return std::make_unique<GaussianNB>(spec);
    case ModelKind::KNN: return std::make_unique<KNearestNeighbors>(spec);
    case ModelKind::DT: return std::make_unique<DecisionTree>(spec);
    case ModelKind::RF: return std::make_unique<RandomForest>(spec);
    case ModelKind::AB: return std::make_unique<AdaBoost>(spec);
    case ModelKind::GB: return std::make_unique<GradientBoosting>(spec);
    case ModelKind::SVM: return std::make_unique<LinearSVM>(spec);
  }
  throw UsageError("unknown model kind");
}

std::unique_ptr<Classifier> load_classifier(BinaryReader& r) {
  json j = json::parse(r.read_string(), nullptr, false);
  if (j.is_discarded()) throw DataError("corrupt model spec");
  auto model = make_classifier(ModelSpec::from_json(j));
  model->n_features_ = r.read<std::uint64_t>();
  model->load_state(r);
  model->fitted_ = true;
  return model;
}

namespace {

void write_trees(BinaryWriter& w, const std::vector<Tree>& trees) {
  w.write<std::uint64_t>(trees.size());
  for (const auto& t : trees) t.save(w);
}

std::vector<Tree> read_trees(BinaryReader& r) {
  std::vector<Tree> trees(r.read<std::uint64_t>());
  for (auto& t : trees) t = Tree::load(r);
  return trees;
}

void check_width(const Matrix& X, std::size_t expected) {
  if (X.cols() != expected) {
    throw UsageError("model expects " + std::to_string(expected) + " features, got " + std::to_string(X.cols()));
  }
}

TreeGrowth growth_from(const Hyperparams& p) {
  TreeGrowth g;
  g.max_depth = param_int_or(p, "max_depth", 0);
  if (p.contains("min_samples_leaf")) g.min_samples_leaf = static_cast<std::size_t>(param_int(p, "min_samples_leaf"));
  if (p.contains("min_samples_split")) g.min_samples_split = static_cast<std::size_t>(param_int(p, "min_samples_split"));
  return g;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

// Gaussian naive Bayes

void GaussianNB::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  const double smoothing = param_real(spec_.params, "var_smoothing");
  double max_var = 0;
  auto overall = ScalerParams::fit(X);
  for (double s : overall.stddev) max_var = std::max(max_var, s * s);
  const double eps = smoothing * max_var;

  std::array<double, 2> wsum{};
  for (int c = 0; c < 2; ++c) {
    mean_[c].assign(n_features_, 0.0);
    var_[c].assign(n_features_, 0.0);
  }
  for (std::size_t i = 0; i < X.rows(); ++i) {
    int c = y[i];
    wsum[c] += weights[i];
    auto row = X.row(i);
    for (std::size_t f = 0; f < n_features_; ++f) mean_[c][f] += weights[i] * row[f];
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& m : mean_[c]) m /= wsum[c];
  }
  for (std::size_t i = 0; i < X.rows(); ++i) {
    int c = y[i];
    auto row = X.row(i);
    for (std::size_t f = 0; f < n_features_; ++f) {
      double d = row[f] - mean_[c][f];
      var_[c][f] += weights[i] * d * d;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& v : var_[c]) v = v / wsum[c] + eps;
    log_prior_[c] = std::log(wsum[c] / (wsum[0] + wsum[1]));
  }
  // A feature constant in both classes with zero smoothing would divide by 0.
  for (int c = 0; c < 2; ++c) {
    for (auto& v : var_[c]) v = std::max(v, std::numeric_limits<double>::min());
  }
  fitted_ = true;
}

double GaussianNB::log_posterior_ratio(std::span<const double> x) const {
  std::array<double, 2> ll = log_prior_;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t f = 0; f < n_features_; ++f) {
      double d = x[f] - mean_[c][f];
      ll[c] += -0.5 * std::log(2.0 * std::numbers::pi * var_[c][f]) - d * d / (2.0 * var_[c][f]);
    }
  }
  return ll[1] - ll[0];
}

std::vector<double> GaussianNB::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double r = log_posterior_ratio(X.row(i));
    out[i] = r >= 0 ? 1.0 / (1.0 + std::exp(-r)) : std::exp(r) / (1.0 + std::exp(r));
  }
  return out;
}

void GaussianNB::save_state(BinaryWriter& w) const {
  for (int c = 0; c < 2; ++c) {
    w.write(log_prior_[c]);
    w.write_doubles(mean_[c]);
    w.write_doubles(var_[c]);
  }
}

void GaussianNB::load_state(BinaryReader& r) {
  for (int c = 0; c < 2; ++c) {
    log_prior_[c] = r.read<double>();
    mean_[c] = r.read_doubles();
    var_[c] = r.read_doubles();
    if (mean_[c].size() != n_features_ || var_[c].size() != n_features_) throw DataError("corrupt NB state");
  }
}

// k nearest neighbours

void KNearestNeighbors::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  X_ = X;
  y_ = y;
  class_weight_ = {1.0, 1.0};
  // Per-row weights are class weights in practice; keep one value per class.
  for (std::size_t i = 0; i < y.size(); ++i) class_weight_[y[i] == 1 ? 1 : 0] = weights[i];
  fitted_ = true;
}

std::vector<double> KNearestNeighbors::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(param_int(spec_.params, "k")), X_.rows());
  std::vector<double> out(X.rows());
  std::vector<std::pair<double, std::size_t>> d(X_.rows());
  for (std::size_t q = 0; q < X.rows(); ++q) {
    auto x = X.row(q);
    for (std::size_t i = 0; i < X_.rows(); ++i) {
      auto t = X_.row(i);
      double s = 0;
      for (std::size_t f = 0; f < n_features_; ++f) {
        double diff = x[f] - t[f];
        s += diff * diff;
      }
      d[i] = {s, i};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    double pos = 0, total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      int label = y_[d[j].second];
      double w = class_weight_[label == 1 ? 1 : 0];
      total += w;
      if (label == 1) pos += w;
    }
    out[q] = pos / total;
  }
  return out;
}

void KNearestNeighbors::save_state(BinaryWriter& w) const {
  w.write<std::uint64_t>(X_.rows());
  w.write_doubles(X_.data());
  std::vector<double> labels(y_.begin(), y_.end());
  w.write_doubles(labels);
  w.write(class_weight_[0]);
  w.write(class_weight_[1]);
}

void KNearestNeighbors::load_state(BinaryReader& r) {
  auto rows = r.read<std::uint64_t>();
  X_ = Matrix(rows, n_features_);
  X_.data() = r.read_doubles();
  auto labels = r.read_doubles();
  if (X_.data().size() != rows * n_features_ || labels.size() != rows) throw DataError("corrupt KNN state");
  y_.assign(labels.begin(), labels.end());
  class_weight_[0] = r.read<double>();
  class_weight_[1] = r.read<double>();
}

// Decision tree

void DecisionTree::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  tree_ = grow_exact_classification_tree(X, y, weights, all_rows(X.rows()), growth_from(spec_.params));
  fitted_ = true;
}

std::vector<double> DecisionTree::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = tree_.predict(X.row(i));
  return out;
}

void DecisionTree::save_state(BinaryWriter& w) const { tree_.save(w); }
void DecisionTree::load_state(BinaryReader& r) { tree_ = Tree::load(r); }

// Random forest

void RandomForest::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  auto data = BinnedData::build(X);
  auto growth = growth_from(spec_.params);
  const auto& mf = spec_.params.at("max_features");
  double p = static_cast<double>(n_features_);
  growth.max_features = static_cast<std::size_t>(std::max(1.0, std::floor(mf.is_null() ? std::sqrt(p) : mf.get<double>() * p)));
  const int n_trees = param_int(spec_.params, "n_estimators");
  trees_.clear();
  const std::size_t n = X.rows();
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(spec_.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.index(n);
    trees_.push_back(grow_classification_tree(data, y, weights, std::move(rows), growth, &rng));
  }
  fitted_ = true;
}

std::vector<double> RandomForest::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  std::vector<double> out(X.rows(), 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    std::size_t votes = 0;
    for (const auto& t : trees_) votes += t.predict(X.row(i)) > 0.5;
    out[i] = static_cast<double>(votes) / static_cast<double>(trees_.size());
  }
  return out;
}

void RandomForest::save_state(BinaryWriter& w) const { write_trees(w, trees_); }
void RandomForest::load_state(BinaryReader& r) { trees_ = read_trees(r); }

// AdaBoost (SAMME, two classes)

void AdaBoost::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  auto data = BinnedData::build(X);
  TreeGrowth growth;
  growth.max_depth = param_int(spec_.params, "max_depth");
  const double lr = param_real(spec_.params, "learning_rate");
  const int rounds = param_int(spec_.params, "n_estimators");
  std::vector<double> w(weights.begin(), weights.end());
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  trees_.clear();
  alphas_.clear();
  const auto rows = all_rows(X.rows());
  std::vector<char> miss(X.rows());
  for (int m = 0; m < rounds; ++m) {
    Tree tree = grow_classification_tree(data, y, w, rows, growth);
    double err = 0, wsum = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      int pred = tree.predict(X.row(i)) > 0.5 ? 1 : 0;
      miss[i] = pred != y[i];
      wsum += w[i];
      if (miss[i]) err += w[i];
    }
    err /= wsum;
    if (err <= 0) {
      trees_.push_back(std::move(tree));
      alphas_.push_back(1.0);
      break;
    }
    if (err >= 0.5) {
      if (trees_.empty()) {
        trees_.push_back(std::move(tree));
        alphas_.push_back(1.0);
      }
      break;
    }
    double alpha = lr * std::log((1.0 - err) / err);
    trees_.push_back(std::move(tree));
    alphas_.push_back(alpha);
    double norm = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (miss[i]) w[i] *= std::exp(alpha);
      norm += w[i];
    }
    for (auto& v : w) v /= norm;
  }
  fitted_ = true;
}

std::vector<double> AdaBoost::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  double total = std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
  std::vector<double> out(X.rows(), 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double s = 0;
    for (std::size_t m = 0; m < trees_.size(); ++m) s += alphas_[m] * (trees_[m].predict(X.row(i)) > 0.5 ? 1.0 : -1.0);
    out[i] = s / total;
  }
  return out;
}

void AdaBoost::save_state(BinaryWriter& w) const {
  write_trees(w, trees_);
  w.write_doubles(alphas_);
}

void AdaBoost::load_state(BinaryReader& r) {
  trees_ = read_trees(r);
  alphas_ = r.read_doubles();
  if (alphas_.size() != trees_.size()) throw DataError("corrupt AdaBoost state");
}

// Gradient boosting

namespace {

double logistic_loss(std::span<const double> F, const Labels& y, std::span<const double> w) {
  double loss = 0, wsum = 0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    // log(1 + e^F) - yF, evaluated without overflow.
    double f = F[i];
    double softplus = f > 0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
    loss += w[i] * (softplus - (y[i] == 1 ? f : 0.0));
    wsum += w[i];
  }
  return loss / wsum;
}

double sigmoid(double f) { return f >= 0 ? 1.0 / (1.0 + std::exp(-f)) : std::exp(f) / (1.0 + std::exp(f)); }

}  // namespace

void GradientBoosting::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  auto data = BinnedData::build(X);
  TreeGrowth growth;
  growth.max_depth = param_int(spec_.params, "max_depth");
  growth.min_samples_leaf = static_cast<std::size_t>(param_int(spec_.params, "min_samples_leaf"));
  const double lr = param_real(spec_.params, "learning_rate");
  const double l2 = param_real(spec_.params, "l2");
  const int rounds = param_int(spec_.params, "n_estimators");
  const std::size_t n = X.rows();

  double pos = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += weights[i];
    if (y[i] == 1) pos += weights[i];
  }
  base_score_ = std::log(pos / (total - pos));
  std::vector<double> F(n, base_score_), g(n), h(n), step(n), trial(n);
  trees_.clear();
  loss_history_ = {logistic_loss(F, y, weights)};
  const auto rows = all_rows(n);

  for (int m = 0; m < rounds; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(F[i]);
      g[i] = weights[i] * (p - (y[i] == 1 ? 1.0 : 0.0));
      h[i] = weights[i] * std::max(p * (1.0 - p), 1e-16);
    }
    Tree tree = grow_gradient_tree(data, g, h, rows, growth, l2);
    for (std::size_t i = 0; i < n; ++i) step[i] = tree.predict(X.row(i));
    double scale = lr, loss = loss_history_.back(), next = loss;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = F[i] + scale * step[i];
      next = logistic_loss(trial, y, weights);
      if (next <= loss) break;
      scale /= 2.0;
    }
    if (next > loss) {
      scale = 0.0;
      next = loss;
    } else {
      F.swap(trial);
    }
    tree.scale_leaves(scale);
    trees_.push_back(std::move(tree));
    loss_history_.push_back(next);
  }
  fitted_ = true;
}

std::vector<double> GradientBoosting::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  std::vector<double> out(X.rows(), base_score_);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (const auto& t : trees_) out[i] += t.predict(X.row(i));
  }
  return out;
}

void GradientBoosting::save_state(BinaryWriter& w) const {
  w.write(base_score_);
  write_trees(w, trees_);
  w.write_doubles(loss_history_);
}

void GradientBoosting::load_state(BinaryReader& r) {
  base_score_ = r.read<double>();
  trees_ = read_trees(r);
  loss_history_ = r.read_doubles();
}

// Linear SVM

void LinearSVM::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  const std::size_t n = X.rows(), p = n_features_;
  const double C = param_real(spec_.params, "C");
  const int epochs = param_int(spec_.params, "epochs");
  const double eta0 = param_real(spec_.params, "eta0");
  const double lambda = 1.0 / (C * static_cast<double>(n));

  std::vector<double> w(p, 0.0), avg_w(p, 0.0);
  double b = 0, avg_b = 0, averaged = 0;
  Rng rng(spec_.seed);
  std::vector<std::size_t> order = all_rows(n);
  std::uint64_t t = 0;
  const int average_from = epochs / 2;
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      double eta = eta0 / (1.0 + eta0 * lambda * static_cast<double>(t));
      auto x = X.row(i);
      double yi = y[i] == 1 ? 1.0 : -1.0;
      double margin = b;
      for (std::size_t f = 0; f < p; ++f) margin += w[f] * x[f];
      margin *= yi;
      double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        double c = eta * weights[i] * yi;
        for (std::size_t f = 0; f < p; ++f) w[f] += c * x[f];
        b += c;
      }
      if (e >= average_from) {
        averaged += 1.0;
        double k = 1.0 / averaged;
        for (std::size_t f = 0; f < p; ++f) avg_w[f] += (w[f] - avg_w[f]) * k;
        avg_b += (b - avg_b) * k;
      }
    }
  }
  w_ = std::move(avg_w);
  b_ = avg_b;
  fitted_ = true;
}

std::vector<double> LinearSVM::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  std::vector<double> out(X.rows(), b_);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto x = X.row(i);
    for (std::size_t f = 0; f < n_features_; ++f) out[i] += w_[f] * x[f];
  }
  return out;
}

void LinearSVM::save_state(BinaryWriter& w) const {
  w.write_doubles(w_);
  w.write(b_);
}

void LinearSVM::load_state(BinaryReader& r) {
  w_ = r.read_doubles();
  b_ = r.read<double>();
  if (w_.size() != n_features_) throw DataError("corrupt SVM state");
}

// Voting ensemble

void VoteEnsemble::fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) {
  check_training_set(X, y, weights);
  n_features_ = X.cols();
  members_.clear();
  for (int m = 0; m < spec_.ensemble_size; ++m) {
    ModelSpec member = spec_;
    member.ensemble_size = 1;
    member.member_resampling = false;
    member.seed = derive_seed(spec_.seed, static_cast<std::uint64_t>(m));
    auto model = make_classifier(member);
    if (spec_.member_resampling) {
      auto rs = rebalance(X, y, RebalanceParams{}, derive_seed(member.seed, 0x5a));
      model->fit(rs.X, rs.y);
    } else {
      model->fit_weighted(X, y, weights);
    }
    members_.push_back(std::move(model));
  }
  fitted_ = true;
}

Labels majority_vote(const std::vector<Labels>& member_predictions) {
  if (member_predictions.empty()) throw UsageError("majority vote needs at least one member");
  const std::size_t n = member_predictions.front().size();
  std::vector<std::size_t> positive(n, 0);
  for (const auto& p : member_predictions) {
    if (p.size() != n) throw UsageError("member predictions differ in length");
    for (std::size_t i = 0; i < n; ++i) positive[i] += p[i] == 1;
  }
  Labels out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 2 * positive[i] >= member_predictions.size() ? 1 : 0;
  return out;
}

std::vector<double> VoteEnsemble::decision_scores(const Matrix& X) const {
  require_fitted();
  check_width(X, n_features_);
  std::vector<double> out(X.rows(), 0.0);
  for (const auto& m : members_) {
    auto p = m->predict(X);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] += p[i];
  }
  for (auto& v : out) v /= static_cast<double>(members_.size());
  return out;
}

Labels VoteEnsemble::predict(const Matrix& X) const {
  require_fitted();
  std::vector<Labels> votes;
  for (const auto& m : members_) votes.push_back(m->predict(X));
  return majority_vote(votes);
}

void VoteEnsemble::save_state(BinaryWriter& w) const {
  w.write<std::uint64_t>(members_.size());
  for (const auto& m : members_) m->save(w);
}

void VoteEnsemble::load_state(BinaryReader& r) {
  members_.clear();
  auto n = r.read<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) members_.push_back(load_classifier(r));
}

}  // namespace abandon
