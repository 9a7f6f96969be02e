#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abandon/common/matrix.hpp"

namespace abandon {

// Average unsuccessful-search path length in a binary search tree of n
// items: 2H(n-1) - 2(n-1)/n, with c(2) = 1 and c(n <= 1) = 0.
double average_path_length(double n);

struct IsolationForestParams {
  std::size_t n_trees = 100;
  std::size_t subsample = 256;  // clamped to the row count
  double contamination = 0.02;
  std::uint64_t seed = 0;
};

class IsolationForest {
 public:
  static IsolationForest fit(const Matrix& X, const IsolationForestParams& params);

  // Anomaly score 2^(-E[h(x)] / c(subsample)), in (0, 1); higher is more
  // anomalous.
  double score(std::span<const double> x) const;
  std::vector<double> scores(const Matrix& X) const;
  double mean_path_length(std::span<const double> x) const;
  std::size_t subsample() const { return subsample_; }

 private:
  struct Node {
    std::int32_t feature = -1;
    double split = 0;
    std::int32_t left = -1, right = -1;
    std::size_t size = 0;
  };
  using ITree = std::vector<Node>;
  double path_length(const ITree& t, std::span<const double> x) const;

  std::vector<ITree> trees_;
  std::size_t subsample_ = 0;
};

struct OutlierResult {
  std::vector<double> scores;
  std::vector<std::size_t> outliers;  // ascending
  std::vector<std::size_t> inliers;   // ascending
  double threshold = 0;               // lowest flagged score
};

// Flags the round(contamination * n) highest-scoring rows (ties to the lower
// index).
OutlierResult detect_outliers(const Matrix& X, const IsolationForestParams& params);

}  // namespace abandon
