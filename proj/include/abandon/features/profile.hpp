#pragma once

#include <array>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "abandon/cohort/intervention.hpp"
#include "abandon/common/stats.hpp"
#include "abandon/ingest/event.hpp"
#include "abandon/text/sentiment.hpp"
#include "abandon/text/toxicity.hpp"

namespace abandon {

// Comment scope: every community, banned communities, or the rest.
enum class Scope { All = 0, Banned = 1, External = 2 };
inline constexpr int kScopeCount = 3;

// Per-comment text measurements aggregated per user, in this order:
// six toxicity dimensions, four sentiment scores, two readability grades,
// seven part-of-speech rates.
inline constexpr int kTextBaseCount = 19;
enum TextBase {
  kTextToxicity = 0,
  kTextSevereToxicity,
  kTextObscene,
  kTextInsult,
  kTextIdentityAttack,
  kTextThreat,
  kTextSentPositive,
  kTextSentNegative,
  kTextSentNeutral,
  kTextSentCompound,
  kTextFleschKincaid,
  kTextSmog,
  kTextPosNoun,
  kTextPosVerb,
  kTextPosAdjective,
  kTextPosAdverb,
  kTextPosPronoun,
  kTextPosDeterminer,
  kTextPosPreposition,
};

struct ScopeProfile {
  std::size_t comments = 0;
  std::map<std::string, std::size_t> communities;
  std::vector<double> vote_scores;
  std::vector<std::size_t> monthly;  // per 30-day block, oldest first
  std::size_t threads_started = 0;
  std::set<std::string> repliers;    // distinct other users replying to this user
  std::set<std::string> replied_to;  // distinct other users this user replied to
  std::size_t replies_received = 0;
};

// Everything the extractors need about one user's pre-period comments.
struct UserProfile {
  std::string user_id;
  std::array<ScopeProfile, kScopeCount> scope;
  std::vector<double> times;  // sorted
  std::size_t stickied = 0;
  std::size_t replies_made = 0;
  std::size_t text_comments = 0;
  std::array<stats::RunningStats, kTextBaseCount> text;

  const ScopeProfile& in(Scope s) const { return scope[static_cast<int>(s)]; }
};

// Cohort-wide values for rank-based features, gathered after all profiles
// are built.
struct CohortContext {
  InterventionSpec spec;
  // Sorted per-scope mean vote scores of users with comments in the scope.
  std::array<std::vector<double>, kScopeCount> mean_scores;

  // rank/N with ties sharing the mean rank; NaN when the value is NaN.
  double rank_percentile(Scope s, double value) const;
};

struct TextOptions {
  bool strip_markdown = true;
  // Leave "[deleted]" / "[removed]" bodies out of the text aggregates.
  bool skip_placeholder_bodies = false;
};

struct TextScorers {
  const text::SentimentAnalyzer* sentiment = nullptr;
  const text::ToxicityScorer* toxicity = nullptr;
};

// Per-comment measurements in TextBase order.
std::array<double, kTextBaseCount> score_comment(const CommentEvent& e, const TextScorers& scorers,
                                                 const TextOptions& options);

bool is_placeholder_body(std::string_view body);

// Reply relations are filled in later by the matrix builder, which sees
// every user's comments.
UserProfile build_profile(std::string_view user_id, const std::vector<const CommentEvent*>& events,
                          const InterventionSpec& spec, const TextScorers& scorers, const TextOptions& options);

}  // namespace abandon
