#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abandon/common/matrix.hpp"
#include "abandon/ingest/event.hpp"

namespace abandon {

// Activity strata cut at the 20/40/60/80% quantiles of comment counts:
// VL: n <= Q20, LO: Q20 < n <= Q40, ..., VH: n > Q80.
inline constexpr std::array<std::string_view, 5> kActivityBinLabels = {"VL", "LO", "ME", "HI", "VH"};

struct ActivityBinPlan {
  std::array<double, 4> thresholds{};

  std::size_t bin_of(double count) const;
  // Row indices per bin; together they partition [0, counts.size()).
  std::vector<std::vector<std::size_t>> assign(std::span<const double> counts) const;
  nlohmann::json to_json() const;
};

// Logs a warning when some bins come out empty.
ActivityBinPlan activity_bins(std::span<const double> counts);

// Users taking part in each banned community: strictly more than
// `min_comments` pre-period comments there.
struct GroupAssignment {
  std::vector<std::string> groups;               // sorted community ids
  std::vector<std::vector<std::size_t>> members;  // per group, ascending user indices

  // Indices of users in no group.
  std::vector<std::size_t> ungrouped(std::size_t n_users) const;
};

inline constexpr std::size_t kParticipationThreshold = 10;

GroupAssignment assign_groups(const SplitSet& splits, const std::vector<std::string>& users,
                              std::size_t min_comments = kParticipationThreshold);

// o(i, j) = 100 |U_i ∩ U_j| / |U_i|; an empty group has 100 on the diagonal
// and 0 elsewhere.
struct OverlapMatrix {
  std::vector<std::string> groups;
  Matrix percent;

  nlohmann::json to_json() const;
};

OverlapMatrix overlap_matrix(const GroupAssignment& assignment);

}  // namespace abandon
