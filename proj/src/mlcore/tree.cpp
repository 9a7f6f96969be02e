#include "abandon/mlcore/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "abandon/common/error.hpp"

namespace abandon {

BinnedData BinnedData::build(const Matrix& X, std::size_t max_bins) {
  if (max_bins < 2 || max_bins > 256) throw UsageError("bin count must be in [2, 256]");
  BinnedData d;
  d.rows = X.rows();
  d.cols = X.cols();
  d.codes.assign(d.rows * d.cols, 0);
  d.thresholds.resize(d.cols);
  std::vector<double> col(d.rows);
  for (std::size_t c = 0; c < d.cols; ++c) {
    for (std::size_t r = 0; r < d.rows; ++r) col[r] = X(r, c);
    std::sort(col.begin(), col.end());
    auto& t = d.thresholds[c];
    std::vector<double> uniq(col.begin(), std::unique(col.begin(), col.end()));
    if (uniq.size() <= max_bins) {
      for (std::size_t i = 1; i < uniq.size(); ++i) {
        double mid = uniq[i - 1] + (uniq[i] - uniq[i - 1]) / 2.0;
        t.push_back(mid < uniq[i] ? mid : uniq[i - 1]);
      }
    } else {
      // Edges sit halfway to the next distinct value, as for exact bins.
      for (std::size_t q = 1; q < max_bins; ++q) {
        double v = col[q * d.rows / max_bins];
        auto next = std::upper_bound(col.begin(), col.end(), v);
        if (next == col.end()) break;
        double mid = v + (*next - v) / 2.0;
        if (!(mid < *next)) mid = v;
        if (t.empty() || mid > t.back()) t.push_back(mid);
      }
    }
    for (std::size_t r = 0; r < d.rows; ++r) {
      double x = X(r, c);
      d.codes[r * d.cols + c] = static_cast<std::uint8_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
    }
  }
  return d;
}

double Tree::predict(std::span<const double> x) const {
  if (nodes.empty()) throw UsageError("predict on an empty tree");
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

void Tree::scale_leaves(double factor) {
  for (auto& n : nodes) {
    if (n.feature < 0) n.value *= factor;
  }
}

void Tree::save(BinaryWriter& w) const {
  w.write<std::uint64_t>(nodes.size());
  for (const auto& n : nodes) {
    w.write(n.feature);
    w.write(n.threshold);
    w.write(n.left);
    w.write(n.right);
    w.write(n.value);
  }
}

Tree Tree::load(BinaryReader& r) {
  Tree t;
  auto n = r.read<std::uint64_t>();
  t.nodes.resize(n);
  for (auto& node : t.nodes) {
    node.feature = r.read<std::int32_t>();
    node.threshold = r.read<double>();
    node.left = r.read<std::int32_t>();
    node.right = r.read<std::int32_t>();
    node.value = r.read<double>();
    if (node.feature >= 0 && (node.left <= 0 || node.right <= 0 || static_cast<std::uint64_t>(node.left) >= n ||
                              static_cast<std::uint64_t>(node.right) >= n)) {
      throw DataError("corrupt tree node");
    }
  }
  return t;
}

namespace {

// Per-row statistics (a, b): (w*y, w) for Gini, (g, h) for Newton trees.
// cost() is what a split minimizes; leaf() is the stored value.
struct GiniPolicy {
  const Labels& y;
  std::span<const double> w;
  double a(std::size_t r) const { return y[r] == 1 ? w[r] : 0.0; }
  double b(std::size_t r) const { return w[r]; }
  double cost(double A, double B) const { return B > 0 ? 2.0 * A * (B - A) / B : 0.0; }
  double leaf(double A, double B) const { return B > 0 ? A / B : 0.5; }
  bool pure(double A, double B) const { return A <= 0 || A >= B; }
};

struct NewtonPolicy {
  std::span<const double> g, h;
  double l2;
  double a(std::size_t r) const { return g[r]; }
  double b(std::size_t r) const { return h[r]; }
  double cost(double A, double B) const { return -(A * A) / (B + l2); }
  double leaf(double A, double B) const { return B + l2 > 0 ? -A / (B + l2) : 0.0; }
  bool pure(double, double) const { return false; }
};

// Exactly one of `data` (histogram splits) and `raw` (exact splits over the
// sorted node values) is given.
template <class Policy>
Tree grow(const BinnedData* data, const Matrix* raw, const Policy& policy, std::vector<std::size_t> rows,
          const TreeGrowth& growth, Rng* rng) {
  Tree tree;
  if (rows.empty()) throw UsageError("cannot grow a tree without rows");
  const std::size_t p = data ? data->cols : raw->cols();
  const std::size_t per_node = growth.max_features == 0 ? p : std::min(growth.max_features, p);
  if (per_node < p && rng == nullptr) throw UsageError("feature subsampling needs a random source");

  std::vector<std::size_t> all_features(p);
  std::iota(all_features.begin(), all_features.end(), 0);
  std::vector<std::size_t> offset(p + 1, 0);
  if (data) {
    for (std::size_t f = 0; f < p; ++f) offset[f + 1] = offset[f] + data->bins(f);
  }
  std::vector<double> ha(offset[p]), hb(offset[p]);
  std::vector<std::uint32_t> hc(offset[p]);
  std::vector<std::pair<double, std::size_t>> sorted;

  struct Task {
    std::size_t node, begin, end, depth;
  };
  std::vector<Task> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, rows.size(), 0});

  while (!stack.empty()) {
    Task t = stack.back();
    stack.pop_back();
    double A = 0, B = 0;
    for (std::size_t i = t.begin; i < t.end; ++i) {
      A += policy.a(rows[i]);
      B += policy.b(rows[i]);
    }
    const std::size_t n = t.end - t.begin;
    tree.nodes[t.node].value = policy.leaf(A, B);
    bool can_split = n >= growth.min_samples_split && n >= 2 * growth.min_samples_leaf && !policy.pure(A, B) &&
                     (growth.max_depth <= 0 || t.depth < static_cast<std::size_t>(growth.max_depth));
    if (!can_split) continue;

    std::vector<std::size_t> candidates;
    if (per_node < p && rng != nullptr) {
      candidates = rng->sample_without_replacement(p, per_node);
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates = all_features;
    }
    const double parent_cost = policy.cost(A, B);
    double best_gain = 0;
    std::int64_t best_feature = -1;
    std::size_t best_bin = 0;
    double best_threshold = 0;
    if (data) {
      for (auto f : candidates) {
        std::fill(ha.begin() + static_cast<std::ptrdiff_t>(offset[f]), ha.begin() + static_cast<std::ptrdiff_t>(offset[f + 1]), 0.0);
        std::fill(hb.begin() + static_cast<std::ptrdiff_t>(offset[f]), hb.begin() + static_cast<std::ptrdiff_t>(offset[f + 1]), 0.0);
        std::fill(hc.begin() + static_cast<std::ptrdiff_t>(offset[f]), hc.begin() + static_cast<std::ptrdiff_t>(offset[f + 1]), 0u);
      }
      for (std::size_t i = t.begin; i < t.end; ++i) {
        std::size_t r = rows[i];
        const std::uint8_t* code = data->codes.data() + r * p;
        double a = policy.a(r), b = policy.b(r);
        for (auto f : candidates) {
          std::size_t k = offset[f] + code[f];
          ha[k] += a;
          hb[k] += b;
          ++hc[k];
        }
      }

      for (auto f : candidates) {
        double la = 0, lb = 0;
        std::size_t lc = 0;
        for (std::size_t bin = 0; bin + 1 < data->bins(f); ++bin) {
          std::size_t k = offset[f] + bin;
          la += ha[k];
          lb += hb[k];
          lc += hc[k];
          if (lc < growth.min_samples_leaf) continue;
          if (n - lc < growth.min_samples_leaf) break;
          if (hc[k] == 0 && bin > 0) continue;  // same partition as the previous cut
          double gain = parent_cost - policy.cost(la, lb) - policy.cost(A - la, B - lb);
          if (gain > best_gain + 1e-12 * std::fabs(parent_cost)) {
            best_gain = gain;
            best_feature = static_cast<std::int64_t>(f);
            best_bin = bin;
          }
        }
      }
    } else {
      for (auto f : candidates) {
        sorted.clear();
        for (std::size_t i = t.begin; i < t.end; ++i) sorted.emplace_back((*raw)(rows[i], f), rows[i]);
        std::sort(sorted.begin(), sorted.end());
        double la = 0, lb = 0;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
          la += policy.a(sorted[i].second);
          lb += policy.b(sorted[i].second);
          const std::size_t lc = i + 1;
          if (sorted[i].first == sorted[i + 1].first) continue;
          if (lc < growth.min_samples_leaf) continue;
          if (n - lc < growth.min_samples_leaf) break;
          double gain = parent_cost - policy.cost(la, lb) - policy.cost(A - la, B - lb);
          if (gain > best_gain + 1e-12 * std::fabs(parent_cost)) {
            best_gain = gain;
            best_feature = static_cast<std::int64_t>(f);
            double lo = sorted[i].first, hi = sorted[i + 1].first;
            double mid = lo + (hi - lo) / 2.0;
            best_threshold = mid < hi ? mid : lo;
          }
        }
      }
    }
    if (best_feature < 0) continue;

    auto f = static_cast<std::size_t>(best_feature);
    if (data) best_threshold = data->thresholds[f][best_bin];
    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(t.begin), rows.begin() + static_cast<std::ptrdiff_t>(t.end),
                              [&](std::size_t r) { return data ? data->code(r, f) <= best_bin : (*raw)(r, f) <= best_threshold; });
    auto split = static_cast<std::size_t>(mid - rows.begin());
    auto left = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[t.node];
    node.feature = static_cast<std::int32_t>(f);
    node.threshold = best_threshold;
    node.left = static_cast<std::int32_t>(left);
    node.right = static_cast<std::int32_t>(left + 1);
    // Right child is pushed first so the left subtree is grown first.
    stack.push_back({left + 1, split, t.end, t.depth + 1});
    stack.push_back({left, t.begin, split, t.depth + 1});
  }
  return tree;
}

}  // namespace

Tree grow_classification_tree(const BinnedData& data, const Labels& y, std::span<const double> weights,
                              std::vector<std::size_t> rows, const TreeGrowth& growth, Rng* rng) {
  return grow(&data, nullptr, GiniPolicy{y, weights}, std::move(rows), growth, rng);
}

Tree grow_exact_classification_tree(const Matrix& X, const Labels& y, std::span<const double> weights,
                                    std::vector<std::size_t> rows, const TreeGrowth& growth, Rng* rng) {
  return grow(nullptr, &X, GiniPolicy{y, weights}, std::move(rows), growth, rng);
}

Tree grow_gradient_tree(const BinnedData& data, std::span<const double> g, std::span<const double> h,
                        std::vector<std::size_t> rows, const TreeGrowth& growth, double l2) {
  return grow(&data, nullptr, NewtonPolicy{g, h, l2}, std::move(rows), growth, nullptr);
}

}  // namespace abandon
