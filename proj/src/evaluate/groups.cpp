#include "abandon/evaluate/groups.hpp"

#include <algorithm>
#include <map>

#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"
#include "abandon/common/stats.hpp"

namespace abandon {

std::size_t ActivityBinPlan::bin_of(double count) const {
  std::size_t b = 0;
  while (b < thresholds.size() && count > thresholds[b]) ++b;
  return b;
}

std::vector<std::vector<std::size_t>> ActivityBinPlan::assign(std::span<const double> counts) const {
  std::vector<std::vector<std::size_t>> bins(kActivityBinLabels.size());
  for (std::size_t i = 0; i < counts.size(); ++i) bins[bin_of(counts[i])].push_back(i);
  return bins;
}

nlohmann::json ActivityBinPlan::to_json() const {
  nlohmann::json labels = nlohmann::json::array();
  for (auto l : kActivityBinLabels) labels.push_back(std::string(l));
  return {{"thresholds", thresholds}, {"labels", labels}, {"quantiles", {0.2, 0.4, 0.6, 0.8}}};
}

ActivityBinPlan activity_bins(std::span<const double> counts) {
  if (counts.empty()) throw UsageError("activity bins need at least one user");
  std::vector<double> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  ActivityBinPlan plan;
  for (std::size_t q = 0; q < 4; ++q) plan.thresholds[q] = stats::quantile_sorted(sorted, 0.2 * static_cast<double>(q + 1));
  auto bins = plan.assign(counts);
  std::size_t empty = static_cast<std::size_t>(std::count_if(bins.begin(), bins.end(), [](const auto& b) { return b.empty(); }));
  if (empty > 0) log::warn("activity bins are degenerate", {{"empty_bins", std::to_string(empty)}});
  return plan;
}

std::vector<std::size_t> GroupAssignment::ungrouped(std::size_t n_users) const {
  std::vector<char> in(n_users, 0);
  for (const auto& m : members)
    for (auto u : m) in[u] = 1;
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < n_users; ++u)
    if (!in[u]) out.push_back(u);
  return out;
}

GroupAssignment assign_groups(const SplitSet& splits, const std::vector<std::string>& users, std::size_t min_comments) {
  std::map<std::string, std::size_t> user_index;
  for (std::size_t i = 0; i < users.size(); ++i) user_index.emplace(users[i], i);
  std::map<std::string, std::map<std::size_t, std::size_t>> counts;
  for (const auto& e : splits[SplitTag::BannedBefore].events) {
    auto it = user_index.find(e.user_id);
    if (it != user_index.end()) ++counts[e.community_id][it->second];
  }
  GroupAssignment g;
  for (const auto& [community, per_user] : counts) {
    g.groups.push_back(community);
    auto& m = g.members.emplace_back();
    for (const auto& [u, n] : per_user)
      if (n > min_comments) m.push_back(u);
  }
  return g;
}

nlohmann::json OverlapMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < percent.rows(); ++i) {
    auto r = percent.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"groups", groups}, {"percent", rows}};
}

OverlapMatrix overlap_matrix(const GroupAssignment& a) {
  const std::size_t k = a.groups.size();
  OverlapMatrix o{a.groups, Matrix(k, k, 0.0)};
  for (std::size_t i = 0; i < k; ++i) {
    o.percent(i, i) = 100.0;
    if (a.members[i].empty()) continue;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      std::vector<std::size_t> common;
      std::set_intersection(a.members[i].begin(), a.members[i].end(), a.members[j].begin(), a.members[j].end(),
                            std::back_inserter(common));
      o.percent(i, j) = 100.0 * static_cast<double>(common.size()) / static_cast<double>(a.members[i].size());
    }
  }
  return o;
}

}  // namespace abandon
