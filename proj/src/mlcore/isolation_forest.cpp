#include "abandon/mlcore/isolation_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "abandon/common/error.hpp"
#include "abandon/common/rng.hpp"

namespace abandon {

double average_path_length(double n) {
  if (n <= 1) return 0.0;
  if (n <= 2) return 1.0;
  constexpr double euler_gamma = 0.5772156649015329;
  double harmonic = std::log(n - 1.0) + euler_gamma;
  return 2.0 * harmonic - 2.0 * (n - 1.0) / n;
}

IsolationForest IsolationForest::fit(const Matrix& X, const IsolationForestParams& params) {
  if (X.rows() == 0) throw DataError("isolation forest needs data");
  if (params.n_trees == 0) throw UsageError("isolation forest needs at least one tree");
  IsolationForest forest;
  forest.subsample_ = std::min(params.subsample, X.rows());
  const auto height_limit = static_cast<std::size_t>(std::ceil(std::log2(std::max<double>(2.0, static_cast<double>(forest.subsample_)))));

  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.seed, t));
    auto rows = rng.sample_without_replacement(X.rows(), forest.subsample_);
    ITree tree;
    struct Task {
      std::size_t node, begin, end, depth;
    };
    tree.emplace_back();
    std::vector<Task> stack{{0, 0, rows.size(), 0}};
    while (!stack.empty()) {
      Task task = stack.back();
      stack.pop_back();
      std::size_t n = task.end - task.begin;
      tree[task.node].size = n;
      if (n <= 1 || task.depth >= height_limit) continue;
      // Draw a feature among those that still vary in this node.
      std::vector<std::size_t> varying;
      std::vector<std::pair<double, double>> ranges;
      for (std::size_t f = 0; f < X.cols(); ++f) {
        double lo = X(rows[task.begin], f), hi = lo;
        for (std::size_t i = task.begin + 1; i < task.end; ++i) {
          lo = std::min(lo, X(rows[i], f));
          hi = std::max(hi, X(rows[i], f));
        }
        if (hi > lo) {
          varying.push_back(f);
          ranges.emplace_back(lo, hi);
        }
      }
      if (varying.empty()) continue;
      std::size_t pick = rng.index(varying.size());
      std::size_t f = varying[pick];
      double split = rng.uniform(ranges[pick].first, ranges[pick].second);
      auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(task.begin), rows.begin() + static_cast<std::ptrdiff_t>(task.end),
                                [&](std::size_t r) { return X(r, f) < split; });
      auto cut = static_cast<std::size_t>(mid - rows.begin());
      if (cut == task.begin || cut == task.end) continue;
      auto left = tree.size();
      tree.emplace_back();
      tree.emplace_back();
      tree[task.node].feature = static_cast<std::int32_t>(f);
      tree[task.node].split = split;
      tree[task.node].left = static_cast<std::int32_t>(left);
      tree[task.node].right = static_cast<std::int32_t>(left + 1);
      stack.push_back({left + 1, cut, task.end, task.depth + 1});
      stack.push_back({left, task.begin, cut, task.depth + 1});
    }
    forest.trees_.push_back(std::move(tree));
  }
  return forest;
}

double IsolationForest::path_length(const ITree& t, std::span<const double> x) const {
  std::size_t i = 0;
  double depth = 0;
  while (t[i].feature >= 0) {
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(t[i].feature)] < t[i].split ? t[i].left : t[i].right);
    depth += 1;
  }
  return depth + average_path_length(static_cast<double>(t[i].size));
}

double IsolationForest::mean_path_length(std::span<const double> x) const {
  double total = 0;
  for (const auto& t : trees_) total += path_length(t, x);
  return total / static_cast<double>(trees_.size());
}

double IsolationForest::score(std::span<const double> x) const {
  double c = average_path_length(static_cast<double>(subsample_));
  if (c <= 0) return 0.5;
  return std::exp2(-mean_path_length(x) / c);
}

std::vector<double> IsolationForest::scores(const Matrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = score(X.row(i));
  return out;
}

OutlierResult detect_outliers(const Matrix& X, const IsolationForestParams& params) {
  if (!(params.contamination >= 0 && params.contamination < 0.5)) throw UsageError("contamination must be in [0, 0.5)");
  auto forest = IsolationForest::fit(X, params);
  OutlierResult out;
  out.scores = forest.scores(X);
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.scores[a] > out.scores[b]; });
  auto n_out = static_cast<std::size_t>(std::llround(params.contamination * static_cast<double>(X.rows())));
  std::vector<char> flagged(X.rows(), 0);
  for (std::size_t i = 0; i < n_out; ++i) flagged[order[i]] = 1;
  out.threshold = n_out > 0 ? out.scores[order[n_out - 1]] : 1.0;
  for (std::size_t i = 0; i < X.rows(); ++i) (flagged[i] ? out.outliers : out.inliers).push_back(i);
  return out;
}

}  // namespace abandon
