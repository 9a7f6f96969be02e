#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abandon/common/binary_io.hpp"
#include "abandon/common/matrix.hpp"
#include "abandon/common/rng.hpp"

namespace abandon {

// Features quantized to at most 256 ordered bins. With few distinct values
// the cut points are the midpoints between neighbours, so splits are exact.
struct BinnedData {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> codes;               // row-major
  std::vector<std::vector<double>> thresholds;   // per feature; bin b holds (t[b-1], t[b]]

  static BinnedData build(const Matrix& X, std::size_t max_bins = 256);
  std::uint8_t code(std::size_t r, std::size_t c) const { return codes[r * cols + c]; }
  std::size_t bins(std::size_t c) const { return thresholds[c].size() + 1; }
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

class Tree {
 public:
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  void scale_leaves(double factor);

  void save(BinaryWriter& w) const;
  static Tree load(BinaryReader& r);
};

struct TreeGrowth {
  int max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // features drawn per node; 0 = all
};

// Weighted Gini CART; a leaf stores the weighted share of positives. `rows`
// may repeat indices (bootstrap samples). `rng` is needed only when
// max_features draws a subset.
Tree grow_classification_tree(const BinnedData& data, const Labels& y, std::span<const double> weights,
                              std::vector<std::size_t> rows, const TreeGrowth& growth, Rng* rng = nullptr);

// Same criterion with exact thresholds: every midpoint between consecutive
// distinct node values is a candidate.
Tree grow_exact_classification_tree(const Matrix& X, const Labels& y, std::span<const double> weights,
                                    std::vector<std::size_t> rows, const TreeGrowth& growth, Rng* rng = nullptr);

// Second-order regression tree on gradients `g` and hessians `h`; a leaf
// stores the Newton step -sum(g) / (sum(h) + l2).
Tree grow_gradient_tree(const BinnedData& data, std::span<const double> g, std::span<const double> h,
                        std::vector<std::size_t> rows, const TreeGrowth& growth, double l2);

}  // namespace abandon
