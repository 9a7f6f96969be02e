#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abandon/cohort/intervention.hpp"
#include "abandon/common/matrix.hpp"
#include "abandon/ingest/event.hpp"

namespace abandon {

// Behaviours whose latent user-level value can drive abandonment.
enum class SignalConcept { ExternalTrend = 0, ParticipationRatio = 1, IdentityAttack = 2, CommentGap = 3 };
inline constexpr std::array<SignalConcept, 4> kAllSignalConcepts = {
    SignalConcept::ExternalTrend, SignalConcept::ParticipationRatio, SignalConcept::IdentityAttack,
    SignalConcept::CommentGap};

// Config keys: "external_trend", "participation_ratio", "identity_attack",
// "comment_gap".
std::string_view signal_concept_name(SignalConcept c);
SignalConcept parse_signal_concept(std::string_view name);

// Every field has a default; `to_json` documents them all.
struct SynthConfig {
  std::size_t n_users = 5000;
  std::size_t n_banned_groups = 15;
  std::size_t n_nonbanned_groups = 40;
  double hard_prior = 0.149;
  double soft_prior = 0.269;
  // Logit weight of each concept, applied to the user's standardized
  // pre-period behaviour: the slope of monthly external comment counts, the
  // ratio of external to banned communities, the share of comments with an
  // identity attack, and the log mean gap between comments. A positive
  // weight makes high values more likely to abandon. Hidden per-user
  // latents drive the variation in each behaviour.
  // The default makes a falling external trend the dominant driver.
  std::map<SignalConcept, double> effects = {{SignalConcept::ExternalTrend, -5.0},
                                             {SignalConcept::ParticipationRatio, -1.0},
                                             {SignalConcept::IdentityAttack, 1.0},
                                             {SignalConcept::CommentGap, 1.0}};
  // Scale of the logistic noise added to the abandonment logit.
  double label_noise = 0.2;

  // Percent of group i's members also in group j (diagonal ignored). Empty
  // means: sizes follow `group_size_skew` and `dual_membership` of users
  // join a second group chosen in proportion to size.
  std::vector<std::vector<double>> overlap_target;
  double dual_membership = 0.25;
  double group_size_skew = 0.5;

  // Mean monthly comments per member group in the banned communities, and
  // mean monthly comments outside them.
  double banned_rate = 4.0;
  double external_rate = 9.0;
  double reply_share = 0.35;
  double stickied_share = 0.005;

  InterventionSpec intervention;  // banned_communities is filled by generate
  std::uint64_t seed = 42;
  int threads = 1;

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static SynthConfig from_json(const nlohmann::json& j);
};

std::string banned_group_name(std::size_t i);
std::string external_community_name(std::size_t i);
std::string synth_user_name(std::size_t i);

struct SynthUser {
  std::string user_id;
  std::vector<std::size_t> groups;  // banned group indices, ascending
  std::array<double, 4> latent{};   // by SignalConcept
  double score = 0;                 // abandonment logit plus noise
  int hard = 0;
  int soft = 0;
};

struct SynthData {
  SynthConfig config;
  InterventionSpec intervention;
  std::vector<SynthUser> users;       // by user id
  std::vector<CommentEvent> events;   // ordered by (timestamp, user id, event id)

  // Percent of group i's users also in group j, from the assignment.
  Matrix overlap() const;
  std::vector<int> labels(Task task) const;
  std::vector<std::string> user_ids() const;
};

// Deterministic for a config; the thread count does not change the output.
// Throws UsageError when the overlap target cannot be realized.
SynthData generate(const SynthConfig& config);

// Newline-delimited records in the layout ingest reads by default; gzip
// compressed when the path ends in ".gz".
void write_dump(const std::filesystem::path& path, const std::vector<CommentEvent>& events);
// user_id,groups with groups joined by ';'.
void write_groups_csv(const std::filesystem::path& path, const SynthData& data);

// Writes `n_lines` syntactically valid records spread over the observation
// frame without building them in memory; used for ingestion load tests.
void write_scale_dump(const std::filesystem::path& path, std::size_t n_lines, std::uint64_t seed,
                      const InterventionSpec& intervention = {}, std::size_t n_users = 20000);

}  // namespace abandon
