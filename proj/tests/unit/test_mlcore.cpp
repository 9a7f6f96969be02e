#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include "abandon/common/error.hpp"
#include "abandon/common/rng.hpp"
#include "abandon/evaluate/metrics.hpp"
#include "abandon/mlcore/isolation_forest.hpp"
#include "abandon/mlcore/training.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace abandon;
using nlohmann::json;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(v.size(), 1);
  std::size_t i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Positives are shifted by `shift` on the first `informative` columns.
struct Dataset {
  Matrix X;
  Labels y;
};

Dataset make_dataset(std::size_t n, std::size_t p, std::size_t informative, double shift, double positive_rate,
                     std::uint64_t seed) {
  Rng rng(seed);
  Dataset d{Matrix(n, p), Labels(n)};
  for (std::size_t i = 0; i < n; ++i) {
    d.y[i] = rng.bernoulli(positive_rate) ? 1 : 0;
    for (std::size_t f = 0; f < p; ++f) {
      d.X(i, f) = rng.normal() + (f < informative && d.y[i] == 1 ? shift : 0.0);
    }
  }
  return d;
}

double accuracy(const Labels& truth, const Labels& pred) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += truth[i] == pred[i];
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

ModelSpec spec_of(ModelKind kind, json params = json::object(), std::uint64_t seed = 7) {
  ModelSpec s;
  s.kind = kind;
  s.params = std::move(params);
  s.seed = seed;
  return s;
}

// Small, fast hyperparameters per kind for property tests.
json quick_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::DT: return {{"max_depth", 3}};
    case ModelKind::RF: return {{"n_estimators", 15}};
    case ModelKind::AB: return {{"n_estimators", 15}};
    case ModelKind::GB: return {{"n_estimators", 20}};
    case ModelKind::SVM: return {{"epochs", 10}};
    default: return json::object();
  }
}

}  // namespace

TEST_CASE("zscore on the worked column") {
  auto p = ScalerParams::fit(column({1, 2, 3}));
  CHECK(p.mean[0] == doctest::Approx(2.0));
  CHECK(p.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
  auto t = p.apply(column({1, 2, 3}));
  CHECK(t(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(t(1, 0) == doctest::Approx(0.0));
  CHECK(t(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
}

TEST_CASE("zscore maps a constant column to zero") {
  auto X = column({5, 5, 5});
  auto t = ScalerParams::fit(X).apply(X);
  for (std::size_t i = 0; i < 3; ++i) CHECK(t(i, 0) == 0.0);
}

TEST_CASE("zscore invariants on random data and idempotence") {
  auto d = make_dataset(200, 6, 0, 0, 0.5, 11);
  for (std::size_t i = 0; i < 200; ++i) d.X(i, 3) = 4.0;  // constant column
  auto p = ScalerParams::fit(d.X);
  auto t = p.apply(d.X);
  for (std::size_t f = 0; f < 6; ++f) {
    CHECK(p.stddev[f] >= 0.0);
    auto col = t.column(f);
    double m = std::accumulate(col.begin(), col.end(), 0.0) / 200.0;
    double v = 0;
    for (double x : col) v += (x - m) * (x - m);
    double s = std::sqrt(v / 200.0);
    CHECK(std::fabs(m) < 1e-9);
    if (f == 3) CHECK(s == 0.0);
    else CHECK(std::fabs(s - 1.0) < 1e-6);
  }
  auto again = ScalerParams::fit(t).apply(t);
  for (std::size_t i = 0; i < 200; ++i)
    for (std::size_t f = 0; f < 6; ++f) CHECK(std::fabs(again(i, f) - t(i, f)) < 1e-9);
}

TEST_CASE("smote examples") {
  Matrix two(2, 2);
  two(0, 0) = 0; two(0, 1) = 0;
  two(1, 0) = 2; two(1, 1) = 4;
  auto s = smote(two, 25, 5, 3);
  REQUIRE(s.rows() == 25);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    // On the segment: y = 2x with x in [0, 2].
    CHECK(s(i, 1) == doctest::Approx(2.0 * s(i, 0)));
    CHECK(s(i, 0) >= 0.0);
    CHECK(s(i, 0) <= 2.0);
  }

  Matrix same(4, 3, 1.5);
  auto t = smote(same, 10, 5, 1);
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t f = 0; f < 3; ++f) CHECK(t(i, f) == 1.5);

  CHECK(smote(two, 0, 5, 1).rows() == 0);
  CHECK_THROWS_AS(smote(column({1.0}), 3, 5, 1), DataError);
}

TEST_CASE("smote stays inside the minority bounding box and is seeded") {
  auto d = make_dataset(30, 4, 0, 0, 0.5, 5);
  auto a = smote(d.X, 200, 5, 99);
  auto b = smote(d.X, 200, 5, 99);
  CHECK(a == b);
  for (std::size_t f = 0; f < 4; ++f) {
    auto col = d.X.column(f);
    auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      CHECK(a(i, f) >= *lo);
      CHECK(a(i, f) <= *hi);
    }
  }
}

TEST_CASE("random undersample examples") {
  auto all = random_undersample(10, 10, 4);
  std::vector<std::size_t> identity(10);
  std::iota(identity.begin(), identity.end(), 0);
  CHECK(all == identity);
  CHECK(random_undersample(10, 0, 4).empty());
  auto a = random_undersample(100, 30, 8);
  CHECK(a == random_undersample(100, 30, 8));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 30);
  CHECK(std::is_sorted(a.begin(), a.end()));
}

TEST_CASE("rebalance targets follow the two-stage rule") {
  RebalanceParams p;
  auto t = rebalance_targets(850, 150, p);
  CHECK(t.majority == 638);
  CHECK(t.minority == 425);
  auto u = rebalance_targets(600, 400, p);
  CHECK(u.majority == 600);
  CHECK(u.minority == 400);
  // 73/27 prior under the same rule.
  auto s = rebalance_targets(730, 270, p);
  CHECK(s.minority == 365);
  CHECK(s.majority == 548);
}

TEST_CASE("rebalance resamples the data to the targets") {
  auto d = make_dataset(1000, 3, 1, 2.0, 0.0, 2);
  for (std::size_t i = 0; i < 150; ++i) d.y[i] = 1;
  RebalanceParams p;
  auto r = rebalance(d.X, d.y, p, 17);
  CHECK(r.before.majority == 850);
  CHECK(r.before.minority == 150);
  CHECK(r.after.majority == 638);
  CHECK(r.after.minority == 425);
  CHECK(r.X.rows() == 1063);
  CHECK(std::count(r.y.begin(), r.y.end(), 1) == 425);
  auto again = rebalance(d.X, d.y, p, 17);
  CHECK(again.X == r.X);

  Labels one(10, 0);
  CHECK_THROWS_AS(rebalance(Matrix(10, 2), one, p, 1), DataError);

  p.strategy = RebalanceStrategy::None;
  CHECK(rebalance(d.X, d.y, p, 1).X == d.X);
}

TEST_CASE("anova examples") {
  Matrix X(4, 3);
  Labels y{0, 0, 1, 1};
  double vals[4][3] = {{7, 0, 1}, {7, 0, 2}, {7, 1, 3}, {7, 1, 4}};
  for (int i = 0; i < 4; ++i)
    for (int f = 0; f < 3; ++f) X(i, f) = vals[i][f];
  auto f = anova_f(X, y);
  CHECK(f[0].value == 0.0);
  CHECK_FALSE(f[0].infinite);
  CHECK(f[1].infinite);
  CHECK(f[2].value == doctest::Approx(8.0).epsilon(1e-12));
  CHECK_THROWS_AS(anova_f(Matrix(3, 1), Labels{0, 0, 1}), DataError);

  auto top = select_top_k(f, 1);
  CHECK(top == std::vector<std::size_t>{1});
}

TEST_CASE("anova agrees with the brute-force formula") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t na = 2 + rng.index(8), nb = 2 + rng.index(8);
    Matrix X(na + nb, 1);
    Labels y(na + nb);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < na + nb; ++i) {
      y[i] = i < na ? 0 : 1;
      X(i, 0) = rng.normal() * 3.0 + (y[i] ? rng.uniform() : 0.0);
      (y[i] ? b : a).push_back(X(i, 0));
    }
    double got = anova_f(X, y)[0].value;
    double want = oracle::anova_f(a, b);
    CHECK(std::fabs(got - want) <= 1e-9 * std::max(1.0, std::fabs(want)));
  }
}

TEST_CASE("select_top_k ordering rules") {
  std::vector<FScore> s{{1.0, false}, {3.0, false}, {3.0, false}, {2.0, false}};
  CHECK(select_top_k(s, 4) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(select_top_k(s, 1) == std::vector<std::size_t>{1});
  CHECK(select_top_k(s, 2) == std::vector<std::size_t>{1, 2});
  std::vector<FScore> tie{{5.0, false}, {2.0, false}, {2.0, false}};
  CHECK(select_top_k(tie, 2) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("stratified folds") {
  Labels y{0, 0, 0, 0, 1, 1, 1, 1};
  auto plan = stratified_kfold(y, 2, 3);
  for (const auto& fold : plan.test) {
    CHECK(fold.size() == 4);
    CHECK(std::count_if(fold.begin(), fold.end(), [&](std::size_t i) { return y[i] == 1; }) == 2);
  }
  auto loo = stratified_kfold(y, 8, 3);
  for (const auto& fold : loo.test) CHECK(fold.size() == 1);
  CHECK_THROWS(stratified_kfold(y, 9, 3));

  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 50 + rng.index(300);
    Labels labels(n);
    for (auto& v : labels) v = rng.bernoulli(0.2 + 0.02 * trial) ? 1 : 0;
    if (std::count(labels.begin(), labels.end(), 1) < 10) continue;
    std::size_t k = trial % 2 ? 10 : 5;
    auto p = stratified_kfold(labels, k, 100 + static_cast<std::uint64_t>(trial));
    CHECK(p == stratified_kfold(labels, k, 100 + static_cast<std::uint64_t>(trial)));
    std::vector<int> seen(n, 0);
    double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    for (const auto& fold : p.test) {
      double fp = 0;
      for (auto i : fold) {
        ++seen[i];
        fp += labels[i];
      }
      double expected = pos * static_cast<double>(fold.size()) / static_cast<double>(n);
      CHECK(std::fabs(fp - expected) <= 1.0 + 1e-9);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("stratified holdout") {
  Labels y(1000, 0);
  for (std::size_t i = 0; i < 270; ++i) y[i * 3] = 1;
  auto s = stratified_split(y, 0.2, 4);
  CHECK(s.test.size() == 200);
  CHECK(s.train.size() == 800);
  CHECK(std::count_if(s.test.begin(), s.test.end(), [&](std::size_t i) { return y[i] == 1; }) == 54);
}

TEST_CASE("isolation forest") {
  CHECK(average_path_length(1) == 0.0);
  CHECK(average_path_length(2) == 1.0);
  const double n = 256;
  double harmonic = 0;
  for (int i = 1; i < 256; ++i) harmonic += 1.0 / i;
  CHECK(average_path_length(n) == doctest::Approx(2.0 * harmonic - 2.0 * (n - 1) / n).epsilon(1e-3));
  CHECK(std::pow(2.0, -average_path_length(n) / average_path_length(n)) == 0.5);

  Rng rng(5);
  Matrix X(301, 2);
  for (std::size_t i = 0; i < 300; ++i) {
    X(i, 0) = rng.normal() * 0.1;
    X(i, 1) = rng.normal() * 0.1;
  }
  X(300, 0) = 8;
  X(300, 1) = -8;
  auto forest = IsolationForest::fit(X, {100, 256, 0.02, 9});
  auto scores = forest.scores(X);
  CHECK(std::max_element(scores.begin(), scores.end()) - scores.begin() == 300);
  for (double s : scores) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }

  // A copy of the most central cluster point scores at or below the median.
  std::size_t central = 0;
  for (std::size_t i = 1; i < 300; ++i) {
    if (std::hypot(X(i, 0), X(i, 1)) < std::hypot(X(central, 0), X(central, 1))) central = i;
  }
  std::vector<double> cluster(scores.begin(), scores.begin() + 300);
  std::nth_element(cluster.begin(), cluster.begin() + 150, cluster.end());
  std::vector<double> dup{X(central, 0), X(central, 1)};
  CHECK(forest.score(dup) <= cluster[150]);

  auto out = detect_outliers(X, {100, 256, 0.02, 9});
  CHECK(out.outliers.size() == 6);
  CHECK(out.outliers.size() + out.inliers.size() == 301);
  CHECK(std::find(out.outliers.begin(), out.outliers.end(), 300) != out.outliers.end());
  auto big = IsolationForest::fit(Matrix(10, 2, 1.0), {10, 256, 0.02, 1});
  CHECK(big.subsample() == 10);
}

TEST_CASE("Gaussian NB matches the closed-form posterior") {
  Matrix X = column({0, 0.1, 10, 10.1});
  Labels y{0, 0, 1, 1};
  GaussianNB nb(spec_of(ModelKind::NB));
  nb.fit(X, y);

  const double overall_var = 25.0025;
  const double eps = 1e-9 * overall_var;
  const double var = 0.0025 + eps;
  auto log_pdf = [&](double x, double mu) { return -0.5 * std::log(2 * std::numbers::pi * var) - (x - mu) * (x - mu) / (2 * var); };
  for (double x : {9.0, 5.04, 5.05, 5.06}) {
    double ratio = log_pdf(x, 10.05) - log_pdf(x, 0.05);
    double posterior = 1.0 / (1.0 + std::exp(-ratio));
    std::vector<double> q{x};
    CHECK(nb.log_posterior_ratio(q) == doctest::Approx(ratio).epsilon(1e-9));
    CHECK(std::fabs(nb.decision_scores(column({x}))[0] - posterior) < 1e-9);
  }
  CHECK(nb.predict(column({9.0}))[0] == 1);
}

TEST_CASE("KNN with k = 1 reproduces training labels") {
  auto d = make_dataset(120, 3, 1, 0.5, 0.4, 31);
  KNearestNeighbors knn(spec_of(ModelKind::KNN, {{"k", 1}}));
  knn.fit(d.X, d.y);
  CHECK(knn.predict(d.X) == d.y);
}

TEST_CASE("decision tree separates a separable toy set") {
  Rng rng(3);
  Matrix X(200, 2);
  Labels y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    X(i, 0) = rng.uniform() * 4 - 2;
    X(i, 1) = rng.uniform() * 4 - 2;
    y[i] = X(i, 0) + 0.5 * X(i, 1) > 0.1 ? 1 : 0;
  }
  DecisionTree dt(spec_of(ModelKind::DT));
  dt.fit(X, y);
  CHECK(dt.predict(X) == y);
}

TEST_CASE("every model learns a shifted signal and refuses misuse") {
  auto train = make_dataset(600, 5, 2, 2.0, 0.35, 41);
  auto test = make_dataset(400, 5, 2, 2.0, 0.35, 42);
  for (auto kind : kAllModelKinds) {
    CAPTURE(model_kind_name(kind));
    auto model = make_classifier(spec_of(kind, quick_params(kind)));
    CHECK_THROWS_AS(model->decision_scores(test.X), UsageError);
    model->fit(train.X, train.y);
    CHECK(accuracy(test.y, model->predict(test.X)) > 0.85);
    CHECK(roc_auc(test.y, model->decision_scores(test.X)) > 0.9);
    auto fresh = make_classifier(spec_of(kind, quick_params(kind)));
    CHECK_THROWS_AS(fresh->fit(train.X, Labels(train.y.size(), 1)), DataError);
  }
}

TEST_CASE("gradient boosting loss never increases") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto d = make_dataset(80 + seed * 7, 3, 1, 0.3 + 0.1 * static_cast<double>(seed % 5), 0.3, 500 + seed);
    GradientBoosting gb(spec_of(ModelKind::GB, {{"n_estimators", 30}, {"learning_rate", seed % 2 ? 0.5 : 0.1}}));
    if (seed % 3 == 0) {
      ModelSpec s = gb.spec();
      s.weighting.mode = ClassWeighting::Mode::Balanced;
      gb = GradientBoosting(s);
    }
    gb.fit(d.X, d.y);
    const auto& loss = gb.loss_history();
    REQUIRE(loss.size() >= 2);
    for (std::size_t r = 1; r < loss.size(); ++r) CHECK(loss[r] <= loss[r - 1]);
  }
}

TEST_CASE("seeded models are bit-deterministic") {
  auto d = make_dataset(300, 6, 2, 1.0, 0.3, 61);
  for (auto kind : {ModelKind::RF, ModelKind::AB, ModelKind::GB, ModelKind::SVM}) {
    CAPTURE(model_kind_name(kind));
    auto a = make_classifier(spec_of(kind, quick_params(kind), 5));
    auto b = make_classifier(spec_of(kind, quick_params(kind), 5));
    a->fit(d.X, d.y);
    b->fit(d.X, d.y);
    CHECK(a->decision_scores(d.X) == b->decision_scores(d.X));
  }
  auto a = IsolationForest::fit(d.X, {50, 128, 0.02, 3}).scores(d.X);
  CHECK(a == IsolationForest::fit(d.X, {50, 128, 0.02, 3}).scores(d.X));
}

TEST_CASE("class weights shift the decision toward the weighted class") {
  auto d = make_dataset(500, 2, 1, 0.8, 0.15, 71);
  ModelSpec plain = spec_of(ModelKind::SVM, {{"epochs", 20}});
  ModelSpec weighted = plain;
  weighted.weighting.mode = ClassWeighting::Mode::Balanced;
  auto a = make_classifier(plain), b = make_classifier(weighted);
  a->fit(d.X, d.y);
  b->fit(d.X, d.y);
  auto pa = a->predict(d.X), pb = b->predict(d.X);
  CHECK(std::count(pb.begin(), pb.end(), 1) > std::count(pa.begin(), pa.end(), 1));

  ClassWeighting w;
  w.mode = ClassWeighting::Mode::Balanced;
  auto r = w.resolve(Labels{0, 0, 0, 1});
  CHECK(r[0] == doctest::Approx(4.0 / 6.0));
  CHECK(r[1] == doctest::Approx(2.0));
}

TEST_CASE("majority vote rule") {
  CHECK(majority_vote({{1, 0}, {1, 0}, {1, 0}}) == Labels{1, 0});
  std::vector<Labels> six_four, five_five;
  for (int m = 0; m < 10; ++m) {
    six_four.push_back({m < 6 ? 1 : 0, m < 6 ? 0 : 1});
    five_five.push_back({m < 5 ? 1 : 0});
  }
  CHECK(majority_vote(six_four) == Labels{1, 0});
  CHECK(majority_vote(five_five) == Labels{1});

  auto d = make_dataset(300, 4, 2, 1.5, 0.3, 81);
  ModelSpec s = spec_of(ModelKind::DT, {{"max_depth", 3}}, 9);
  s.ensemble_size = 10;
  s.member_resampling = true;
  auto ens = make_classifier(s);
  ens->fit(d.X, d.y);
  auto& members = dynamic_cast<VoteEnsemble&>(*ens).members();
  REQUIRE(members.size() == 10);
  std::vector<Labels> votes;
  for (const auto& m : members) votes.push_back(m->predict(d.X));
  CHECK(ens->predict(d.X) == majority_vote(votes));
}

TEST_CASE("hyperparameter validation and grids") {
  CHECK_THROWS_AS(validate_hyperparams(ModelKind::KNN, {{"k", 0}}), UsageError);
  CHECK_THROWS_AS(validate_hyperparams(ModelKind::DT, {{"depth", 3}}), UsageError);
  CHECK_NOTHROW(validate_hyperparams(ModelKind::DT, {{"max_depth", nullptr}}));
  auto pts = expand_grid({{"a", {1, 2}}, {"b", {10, 20, 30}}});
  REQUIRE(pts.size() == 6);
  CHECK(pts[0] == json{{"a", 1}, {"b", 10}});
  CHECK(pts[1] == json{{"a", 1}, {"b", 20}});
  CHECK(pts[3] == json{{"a", 2}, {"b", 10}});
  auto grids = default_grids();
  for (auto kind : kAllModelKinds) {
    for (const auto& p : expand_grid(grids.at(std::string(model_kind_name(kind))))) {
      CHECK_NOTHROW(validate_hyperparams(kind, with_defaults(kind, p)));
    }
  }
}

TEST_CASE("grid search picks the exhaustive best, first on ties") {
  auto d = make_dataset(240, 4, 2, 1.2, 0.3, 91);
  auto plan = stratified_kfold(d.y, 5, 1);
  TrainOptions opt;
  ModelSpec base = spec_of(ModelKind::KNN);

  auto single = grid_search(base, {{{"k", 7}}}, d.X, d.y, plan, opt, 2);
  CHECK(single.best == 0);
  CHECK(single.best_params()["k"] == 7);

  auto dup = grid_search(base, {{{"k", 7}}, {{"k", 7}}}, d.X, d.y, plan, opt, 2);
  CHECK(dup.best == 0);

  std::vector<Hyperparams> grid{{{"k", 1}}, {{"k", 3}}, {{"k", 15}}, {{"k", 41}}};
  auto res = grid_search(base, grid, d.X, d.y, plan, opt, 4);
  std::vector<double> oracle;
  for (const auto& point : grid) {
    ModelSpec s = base;
    s.params = with_defaults(ModelKind::KNN, point);
    double total = 0;
    for (std::size_t f = 0; f < plan.k; ++f) {
      auto tr = plan.train(f);
      total += score_fold(s, d.X.select_rows(tr), select_labels(d.y, tr), d.X.select_rows(plan.test[f]),
                          select_labels(d.y, plan.test[f]), opt);
    }
    oracle.push_back(total / static_cast<double>(plan.k));
  }
  auto want = static_cast<std::size_t>(std::max_element(oracle.begin(), oracle.end()) - oracle.begin());
  CHECK(res.best == want);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(res.scores[i].mean_f1 == doctest::Approx(oracle[i]).epsilon(1e-12));

  CHECK_THROWS_AS(grid_search(base, {}, d.X, d.y, plan, opt, 1), UsageError);
}

TEST_CASE("cross validation is independent of the thread count") {
  auto d = make_dataset(200, 5, 2, 1.0, 0.3, 93);
  auto plan = stratified_kfold(d.y, 5, 2);
  std::vector<Candidate> c;
  for (auto kind : {ModelKind::NB, ModelKind::RF, ModelKind::SVM}) {
    c.push_back({spec_of(kind, quick_params(kind)), options_for(kind, 3, RebalanceParams{})});
  }
  auto one = cross_validate(c, d.X, d.y, plan, 1);
  auto many = cross_validate(c, d.X, d.y, plan, 6);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(one[i].fold_f1 == many[i].fold_f1);
}

TEST_CASE("trained model selects, scales and round-trips") {
  auto d = make_dataset(300, 8, 2, 1.5, 0.2, 95);
  std::vector<std::string> names;
  for (int i = 0; i < 8; ++i) names.push_back("f" + std::to_string(i));
  TempDir dir;
  for (auto kind : kAllModelKinds) {
    CAPTURE(model_kind_name(kind));
    auto options = options_for(kind, 3, RebalanceParams{});
    auto m = train_model(spec_of(kind, quick_params(kind)), d.X, d.y, options, names);
    if (is_ensemble_kind(kind)) {
      CHECK(m.selected.size() == 8);
      CHECK(m.class_counts_after.minority == m.class_counts_before.minority);
    } else {
      REQUIRE(m.selected.size() == 3);
      CHECK(m.selected[0] == 0);
      CHECK(m.selected[1] == 1);
      CHECK(m.class_counts_after.majority <= m.class_counts_before.majority);
    }
    auto path = dir.path() / (std::string(model_kind_name(kind)) + ".model");
    m.save(path);
    auto back = TrainedModel::load(path);
    CHECK(back.selected == m.selected);
    CHECK(back.scaler == m.scaler);
    CHECK(back.decision_scores(d.X) == m.decision_scores(d.X));
    CHECK_THROWS_AS(m.predict(Matrix(2, 7)), UsageError);
  }

  auto path = dir.path() / "NB.model";
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    std::uint32_t v = kModelFormatVersion + 1;
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  try {
    TrainedModel::load(path);
    FAIL("load should refuse a newer format");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("newer") != std::string::npos);
  }
}

TEST_CASE("leakage canary: a label copy on validation rows only does not help") {
  auto d = make_dataset(400, 5, 2, 0.8, 0.3, 97);
  auto plan = stratified_kfold(d.y, 5, 3);
  for (auto kind : kAllModelKinds) {
    CAPTURE(model_kind_name(kind));
    auto options = options_for(kind, 0, RebalanceParams{});
    double with = 0, without = 0;
    for (std::size_t f = 0; f < plan.k; ++f) {
      auto tr = plan.train(f);
      Matrix Xtr = d.X.select_rows(tr), Xval = d.X.select_rows(plan.test[f]);
      Labels ytr = select_labels(d.y, tr), yval = select_labels(d.y, plan.test[f]);
      Matrix Xtr_c(Xtr.rows(), 6, 0.0), Xval_c(Xval.rows(), 6, 0.0), Xval_0(Xval.rows(), 6, 0.0);
      for (std::size_t i = 0; i < Xtr.rows(); ++i)
        for (std::size_t c = 0; c < 5; ++c) Xtr_c(i, c) = Xtr(i, c);
      for (std::size_t i = 0; i < Xval.rows(); ++i) {
        for (std::size_t c = 0; c < 5; ++c) Xval_c(i, c) = Xval_0(i, c) = Xval(i, c);
        Xval_c(i, 5) = yval[i];
      }
      ModelSpec s = spec_of(kind, quick_params(kind));
      with += score_fold(s, Xtr_c, ytr, Xval_c, yval, options);
      without += score_fold(s, Xtr_c, ytr, Xval_0, yval, options);
    }
    CHECK((with - without) / static_cast<double>(plan.k) <= 0.01);
  }
}
