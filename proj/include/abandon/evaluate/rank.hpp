#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace abandon {

// A correlation that is undefined (constant input, fewer than two items) is
// reported as 0 with `defined` cleared.
struct Correlation {
  double value = 0;
  bool defined = true;
};

Correlation pearson_r(std::span<const double> x, std::span<const double> y);
// Pearson correlation of the average ranks.
Correlation spearman_rho(std::span<const double> x, std::span<const double> y);
// Tie-corrected Kendall tau (tau-b).
Correlation kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Extrapolated rank-biased overlap of two ranked lists (best first) with
// persistence p; the lists may differ in length and content.
double rank_biased_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b, double p = 0.9);

struct RankAgreement {
  Correlation kendall_tau;
  Correlation spearman_rho;
  double rbo = 0;
  double persistence = 0.9;
  std::size_t common_items = 0;

  nlohmann::json to_json() const;
};

// tau and rho compare the positions of the items present in both lists; RBO
// uses the lists as given.
RankAgreement rank_agreement(const std::vector<std::string>& a, const std::vector<std::string>& b, double p = 0.9);

}  // namespace abandon
