#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "abandon/common/binary_io.hpp"
#include "abandon/common/matrix.hpp"

namespace abandon {

// Z-score standardization with population std. Columns with zero spread
// map to 0.
struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> stddev;

  static ScalerParams fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
  void apply_row(std::span<double> row) const;

  void save(BinaryWriter& w) const;
  static ScalerParams load(BinaryReader& r);
  bool operator==(const ScalerParams&) const = default;
};

// `n_new` synthetic rows, each interpolated between a random minority row and
// one of its k nearest minority neighbors (Euclidean).
Matrix smote(const Matrix& minority, std::size_t n_new, std::size_t k_neighbors, std::uint64_t seed);

// `n_keep` distinct indices drawn uniformly from [0, n), returned sorted.
std::vector<std::size_t> random_undersample(std::size_t n, std::size_t n_keep, std::uint64_t seed);

enum class RebalanceStrategy { None, Oversample, Undersample, Combined };
std::string_view rebalance_strategy_name(RebalanceStrategy s);
RebalanceStrategy parse_rebalance_strategy(std::string_view name);

struct RebalanceParams {
  RebalanceStrategy strategy = RebalanceStrategy::Combined;
  // Oversampling goal for the combined strategy, as a share of the majority.
  double oversample_fraction = 0.5;
  // Final majority:minority ratio (60:40).
  double majority_per_minority = 1.5;
  std::size_t smote_neighbors = 5;
};

struct RebalanceCounts {
  std::size_t majority = 0;
  std::size_t minority = 0;
};

// Class sizes the strategy produces from the given ones; unchanged when the
// input is already at or below the target imbalance.
RebalanceCounts rebalance_targets(std::size_t majority, std::size_t minority, const RebalanceParams& params);

struct Resampled {
  Matrix X;
  Labels y;
  RebalanceCounts before;
  RebalanceCounts after;
  int minority_label = 1;
};

// Original rows keep their order (minus dropped majority rows); synthetic
// minority rows follow. Throws DataError on single-class input.
Resampled rebalance(const Matrix& X, const Labels& y, const RebalanceParams& params, std::uint64_t seed);

// Two-group one-way ANOVA. Zero within-group variance with a between-group
// difference is reported as `infinite` (value = largest finite double).
struct FScore {
  double value = 0;
  bool infinite = false;
};
std::vector<FScore> anova_f(const Matrix& X, const Labels& y);

// Indices of the k largest scores (infinite first, ties to the lower index),
// returned in ascending index order.
std::vector<std::size_t> select_top_k(const std::vector<FScore>& scores, std::size_t k);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> test;  // per fold, ascending

  std::vector<std::size_t> train(std::size_t fold) const;
  std::size_t size() const;
  bool operator==(const FoldPlan&) const = default;
};

// Each class is shuffled under the seed and dealt round-robin, so every fold
// holds floor or ceil of its share of each class.
FoldPlan stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class stratified holdout; each class contributes round(n_c * fraction)
// test rows.
SplitIndices stratified_split(const Labels& y, double test_fraction, std::uint64_t seed);

}  // namespace abandon
