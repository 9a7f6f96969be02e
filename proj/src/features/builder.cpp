#include "abandon/features/builder.hpp"

#include <algorithm>
#include <unordered_map>

#include "abandon/cohort/cohort.hpp"
#include "abandon/common/error.hpp"
#include "abandon/common/parallel.hpp"

namespace abandon {

void attach_replies(std::vector<UserProfile>& profiles, const SplitSet& splits, const InterventionSpec& spec) {
  std::unordered_map<std::string_view, std::size_t> profile_of;
  for (std::size_t i = 0; i < profiles.size(); ++i) profile_of.emplace(profiles[i].user_id, i);

  std::unordered_map<std::string_view, std::string_view> author_of;
  for (const auto& split : splits.splits) {
    for (const auto& e : split.events) {
      if (spec.in_pre(e.time())) author_of.emplace(e.event_id, e.user_id);
    }
  }

  for (const auto& split : splits.splits) {
    for (const auto& e : split.events) {
      if (!spec.in_pre(e.time()) || e.is_thread_root || !e.parent_id) continue;
      auto parent = author_of.find(strip_kind_prefix(*e.parent_id));
      if (parent == author_of.end() || parent->second == e.user_id) continue;
      Scope local = spec.is_banned(e.community_id) ? Scope::Banned : Scope::External;
      if (auto it = profile_of.find(e.user_id); it != profile_of.end()) {
        for (Scope s : {Scope::All, local}) profiles[it->second].scope[static_cast<int>(s)].replied_to.emplace(parent->second);
      }
      if (auto it = profile_of.find(parent->second); it != profile_of.end()) {
        for (Scope s : {Scope::All, local}) {
          auto& sp = profiles[it->second].scope[static_cast<int>(s)];
          sp.repliers.emplace(e.user_id);
          ++sp.replies_received;
        }
      }
    }
  }
}

CohortContext make_context(const std::vector<UserProfile>& profiles, const InterventionSpec& spec) {
  CohortContext ctx;
  ctx.spec = spec;
  for (const auto& p : profiles) {
    for (int s = 0; s < kScopeCount; ++s) {
      const auto& v = p.scope[static_cast<std::size_t>(s)].vote_scores;
      if (!v.empty()) ctx.mean_scores[static_cast<std::size_t>(s)].push_back(stats::mean(v));
    }
  }
  for (auto& v : ctx.mean_scores) std::sort(v.begin(), v.end());
  return ctx;
}

std::vector<double> evaluate_features(const FeatureRegistry& registry, const UserProfile& profile,
                                      const CohortContext& ctx) {
  std::vector<double> row(registry.size());
  for (std::size_t f = 0; f < registry.size(); ++f) row[f] = registry.compiled(f)(profile, ctx);
  return row;
}

BuildResult build_matrix(const std::vector<std::string>& users, const FeatureRegistry& registry, const SplitSet& splits,
                         const InterventionSpec& spec, const TextScorers& scorers, const BuildOptions& options) {
  auto index = index_users(splits);
  std::vector<std::size_t> slots(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    slots[i] = index.find(users[i]);
    if (slots[i] == index.users.size()) throw DataError("user '" + users[i] + "' has no events in the input splits");
  }

  std::vector<UserProfile> profiles(users.size());
  parallel_for(users.size(), options.threads, [&](std::size_t i) {
    profiles[i] = build_profile(users[i], index.events[slots[i]], spec, scorers, options.text);
  });
  attach_replies(profiles, splits, spec);
  auto ctx = make_context(profiles, spec);

  BuildResult result;
  auto& fm = result.matrix;
  fm.user_ids = users;
  fm.names = registry.names();
  fm.classes = registry.classes();
  fm.registry_version = registry.version();
  fm.registry_hash = registry.hash();
  fm.values = Matrix(users.size(), registry.size());
  parallel_for(users.size(), options.threads, [&](std::size_t i) {
    auto row = evaluate_features(registry, profiles[i], ctx);
    std::copy(row.begin(), row.end(), fm.values.row(i).begin());
  });
  if (options.impute) result.imputation = impute_medians(fm);
  return result;
}

}  // namespace abandon
