#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace abandon::stats {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean(std::span<const double> x);
// Population standard deviation (divide by N); 0 for a single value.
double pstdev(std::span<const double> x);
// Sample standard deviation (divide by N-1); 0 for fewer than two values.
double sstdev(std::span<const double> x);
double median(std::vector<double> x);
// Linear-interpolated quantile, position q*(n-1) on the sorted values.
double quantile(std::vector<double> x, double q);
double quantile_sorted(std::span<const double> sorted, double q);
// Least-squares slope of y against x = 0, 1, ..., n-1.
double ols_slope(std::span<const double> y);

// Streaming mean / population variance / extrema (Welford).
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return n_ ? mean_ : kNaN; }
  double pstdev() const;
  double min() const { return n_ ? min_ : kNaN; }
  double max() const { return n_ ? max_ : kNaN; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace abandon::stats
