#include "abandon/mlcore/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "abandon/common/error.hpp"
#include "abandon/common/rng.hpp"

namespace abandon {

ScalerParams ScalerParams::fit(const Matrix& X) {
  ScalerParams p;
  p.mean.assign(X.cols(), 0.0);
  p.stddev.assign(X.cols(), 0.0);
  if (X.rows() == 0) return p;
  const double n = static_cast<double>(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto row = X.row(r);
    for (std::size_t c = 0; c < X.cols(); ++c) p.mean[c] += row[c];
  }
  for (auto& m : p.mean) m /= n;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto row = X.row(r);
    for (std::size_t c = 0; c < X.cols(); ++c) {
      double d = row[c] - p.mean[c];
      p.stddev[c] += d * d;
    }
  }
  for (auto& s : p.stddev) s = std::sqrt(s / n);
  return p;
}

void ScalerParams::apply_row(std::span<double> row) const {
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = stddev[c] > 0 ? (row[c] - mean[c]) / stddev[c] : 0.0;
}

Matrix ScalerParams::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) throw UsageError("scaler width mismatch");
  Matrix out = X;
  for (std::size_t r = 0; r < out.rows(); ++r) apply_row(out.row(r));
  return out;
}

void ScalerParams::save(BinaryWriter& w) const {
  w.write_doubles(mean);
  w.write_doubles(stddev);
}

ScalerParams ScalerParams::load(BinaryReader& r) {
  ScalerParams p;
  p.mean = r.read_doubles();
  p.stddev = r.read_doubles();
  if (p.mean.size() != p.stddev.size()) throw DataError("corrupt scaler parameters");
  return p;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

Matrix smote(const Matrix& minority, std::size_t n_new, std::size_t k_neighbors, std::uint64_t seed) {
  Matrix out(0, minority.cols());
  if (n_new == 0) return out;
  const std::size_t m = minority.rows();
  if (m < 2) throw DataError("SMOTE needs at least two minority samples");
  const std::size_t k = std::max<std::size_t>(1, std::min(k_neighbors, m - 1));

  std::vector<std::optional<std::vector<std::size_t>>> neighbors(m);
  auto neighbors_of = [&](std::size_t i) -> const std::vector<std::size_t>& {
    if (!neighbors[i]) {
      std::vector<std::pair<double, std::size_t>> d;
      d.reserve(m - 1);
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) d.emplace_back(squared_distance(minority.row(i), minority.row(j)), j);
      }
      std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
      std::vector<std::size_t> idx(k);
      for (std::size_t t = 0; t < k; ++t) idx[t] = d[t].second;
      neighbors[i] = std::move(idx);
    }
    return *neighbors[i];
  };

  Rng rng(seed);
  out = Matrix(n_new, minority.cols());
  for (std::size_t s = 0; s < n_new; ++s) {
    std::size_t base = rng.index(m);
    std::size_t nn = neighbors_of(base)[rng.index(k)];
    double u = rng.uniform();
    auto x = minority.row(base), z = minority.row(nn);
    auto dst = out.row(s);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = x[c] + u * (z[c] - x[c]);
  }
  return out;
}

std::vector<std::size_t> random_undersample(std::size_t n, std::size_t n_keep, std::uint64_t seed) {
  if (n_keep > n) throw UsageError("cannot keep more rows than available");
  Rng rng(seed);
  auto keep = rng.sample_without_replacement(n, n_keep);
  std::sort(keep.begin(), keep.end());
  return keep;
}

std::string_view rebalance_strategy_name(RebalanceStrategy s) {
  switch (s) {
    case RebalanceStrategy::None: return "none";
    case RebalanceStrategy::Oversample: return "smote";
    case RebalanceStrategy::Undersample: return "undersample";
    case RebalanceStrategy::Combined: return "smote+undersample";
  }
  return "?";
}

RebalanceStrategy parse_rebalance_strategy(std::string_view name) {
  for (auto s : {RebalanceStrategy::None, RebalanceStrategy::Oversample, RebalanceStrategy::Undersample,
                 RebalanceStrategy::Combined}) {
    if (rebalance_strategy_name(s) == name) return s;
  }
  throw UsageError("unknown rebalance strategy '" + std::string(name) + "'");
}

RebalanceCounts rebalance_targets(std::size_t majority, std::size_t minority, const RebalanceParams& p) {
  RebalanceCounts out{majority, minority};
  const double r = p.majority_per_minority;
  if (static_cast<double>(majority) <= r * static_cast<double>(minority)) return out;
  auto rnd = [](double v) { return static_cast<std::size_t>(std::llround(v)); };
  switch (p.strategy) {
    case RebalanceStrategy::None:
      break;
    case RebalanceStrategy::Oversample:
      out.minority = std::max(minority, rnd(static_cast<double>(majority) / r));
      break;
    case RebalanceStrategy::Undersample:
      out.majority = std::min(majority, rnd(r * static_cast<double>(minority)));
      break;
    case RebalanceStrategy::Combined:
      out.minority = std::max(minority, rnd(p.oversample_fraction * static_cast<double>(majority)));
      out.majority = std::min(majority, rnd(r * static_cast<double>(out.minority)));
      break;
  }
  return out;
}

Resampled rebalance(const Matrix& X, const Labels& y, const RebalanceParams& params, std::uint64_t seed) {
  if (X.rows() != y.size()) throw UsageError("rebalance: label count mismatch");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw DataError("cannot rebalance a single-class training set");

  Resampled out;
  out.minority_label = pos.size() <= neg.size() ? 1 : 0;
  const auto& min_rows = out.minority_label == 1 ? pos : neg;
  const auto& maj_rows = out.minority_label == 1 ? neg : pos;
  out.before = {maj_rows.size(), min_rows.size()};
  out.after = rebalance_targets(maj_rows.size(), min_rows.size(), params);

  std::vector<char> keep(y.size(), 1);
  if (out.after.majority < maj_rows.size()) {
    std::fill(keep.begin(), keep.end(), 0);
    for (auto i : min_rows) keep[i] = 1;
    for (auto j : random_undersample(maj_rows.size(), out.after.majority, derive_seed(seed, 1))) keep[maj_rows[j]] = 1;
  }
  Matrix synthetic = smote(X.select_rows(min_rows), out.after.minority - min_rows.size(), params.smote_neighbors,
                           derive_seed(seed, 2));

  out.X = Matrix(0, X.cols());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!keep[i]) continue;
    out.X.append_row(X.row(i));
    out.y.push_back(y[i]);
  }
  for (std::size_t s = 0; s < synthetic.rows(); ++s) {
    out.X.append_row(synthetic.row(s));
    out.y.push_back(out.minority_label);
  }
  return out;
}

std::vector<FScore> anova_f(const Matrix& X, const Labels& y) {
  if (X.rows() != y.size()) throw UsageError("anova_f: label count mismatch");
  double n1 = 0, n0 = 0;
  for (int v : y) (v == 1 ? n1 : n0) += 1;
  if (n1 < 2 || n0 < 2) throw DataError("ANOVA needs at least two samples per class");
  const double n = n0 + n1;
  std::vector<FScore> out(X.cols());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    double s0 = 0, s1 = 0;
    for (std::size_t r = 0; r < X.rows(); ++r) (y[r] == 1 ? s1 : s0) += X(r, c);
    double m0 = s0 / n0, m1 = s1 / n1, m = (s0 + s1) / n;
    double within = 0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      double d = X(r, c) - (y[r] == 1 ? m1 : m0);
      within += d * d;
    }
    double between = n0 * (m0 - m) * (m0 - m) + n1 * (m1 - m) * (m1 - m);
    double ms_between = between / 1.0, ms_within = within / (n - 2.0);
    // Relative guards absorb rounding residue on constant columns.
    double scale = std::max(1.0, m * m) * n * 1e-24;
    if (ms_within <= scale) {
      out[c] = between > scale ? FScore{std::numeric_limits<double>::max(), true} : FScore{0.0, false};
    } else {
      out[c] = {ms_between / ms_within, false};
    }
  }
  return out;
}

std::vector<std::size_t> select_top_k(const std::vector<FScore>& scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].infinite != scores[b].infinite) return scores[a].infinite;
    return scores[a].value > scores[b].value;
  });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> FoldPlan::train(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < test.size(); ++f) {
    if (f != fold) out.insert(out.end(), test[f].begin(), test[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t FoldPlan::size() const {
  std::size_t n = 0;
  for (const auto& t : test) n += t.size();
  return n;
}

FoldPlan stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > y.size()) throw UsageError("fold count must be in [2, n]");
  FoldPlan plan;
  plan.k = k;
  plan.test.resize(k);
  Rng rng(seed);
  std::size_t next = 0;
  for (int label : {1, 0}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == label) idx.push_back(i);
    }
    rng.shuffle(idx);
    for (auto i : idx) {
      plan.test[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& t : plan.test) std::sort(t.begin(), t.end());
  return plan;
}

SplitIndices stratified_split(const Labels& y, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0 && test_fraction < 1)) throw UsageError("test fraction must be in (0, 1)");
  SplitIndices out;
  Rng rng(seed);
  for (int label : {1, 0}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == label) idx.push_back(i);
    }
    rng.shuffle(idx);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace abandon
