#pragma once

#include <string>
#include <vector>

#include "abandon/cohort/intervention.hpp"
#include "abandon/features/feature_matrix.hpp"
#include "abandon/features/profile.hpp"
#include "abandon/features/registry.hpp"
#include "abandon/ingest/event.hpp"

namespace abandon {

struct BuildOptions {
  TextOptions text;
  int threads = 1;
  bool impute = true;
};

struct BuildResult {
  FeatureMatrix matrix;
  ImputationReport imputation;
};

// Adds reply relations among pre-period comments of any author in `splits`.
// A reply is scoped by the community of the replying comment; self-replies
// are ignored.
void attach_replies(std::vector<UserProfile>& profiles, const SplitSet& splits, const InterventionSpec& spec);

CohortContext make_context(const std::vector<UserProfile>& profiles, const InterventionSpec& spec);

// Evaluates every registry feature for one profile.
std::vector<double> evaluate_features(const FeatureRegistry& registry, const UserProfile& profile,
                                      const CohortContext& ctx);

// Rows follow `users`; every user must have events in `splits`.
BuildResult build_matrix(const std::vector<std::string>& users, const FeatureRegistry& registry, const SplitSet& splits,
                         const InterventionSpec& spec, const TextScorers& scorers, const BuildOptions& options = {});

}  // namespace abandon
