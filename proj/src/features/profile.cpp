#include "abandon/features/profile.hpp"

#include <algorithm>
#include <cmath>

#include "abandon/common/error.hpp"
#include "abandon/text/pos.hpp"
#include "abandon/text/readability.hpp"
#include "abandon/text/tokenize.hpp"

namespace abandon {

double CohortContext::rank_percentile(Scope s, double value) const {
  if (std::isnan(value)) return stats::kNaN;
  const auto& sorted = mean_scores[static_cast<int>(s)];
  if (sorted.empty()) return stats::kNaN;
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), value);
  auto hi = std::upper_bound(sorted.begin(), sorted.end(), value);
  // Positions lo+1 .. hi share the average rank.
  double first = static_cast<double>(lo - sorted.begin()) + 1.0;
  double last = static_cast<double>(hi - sorted.begin());
  double rank = hi == lo ? first - 0.5 : (first + last) / 2.0;
  return rank / static_cast<double>(sorted.size());
}

bool is_placeholder_body(std::string_view body) { return body == "[deleted]" || body == "[removed]"; }

std::array<double, kTextBaseCount> score_comment(const CommentEvent& e, const TextScorers& scorers,
                                                 const TextOptions& options) {
  if (!scorers.sentiment || !scorers.toxicity) throw UsageError("text scorers are not configured");
  std::string cleaned = options.strip_markdown ? text::strip_markdown(e.body) : e.body;
  auto tokens = text::tokenize(cleaned);
  std::array<double, kTextBaseCount> out{};
  auto tox = scorers.toxicity->score(e.event_id, tokens);
  for (int d = 0; d < text::kToxicityDims; ++d) out[static_cast<std::size_t>(d)] = tox.values[static_cast<std::size_t>(d)];
  auto sent = scorers.sentiment->score_tokens(tokens);
  out[kTextSentPositive] = sent.positive;
  out[kTextSentNegative] = sent.negative;
  out[kTextSentNeutral] = sent.neutral;
  out[kTextSentCompound] = sent.compound;
  auto read = text::readability(cleaned);
  out[kTextFleschKincaid] = read.flesch_kincaid;
  out[kTextSmog] = read.smog;
  auto pos = text::pos_counts(tokens);
  double n = static_cast<double>(tokens.size());
  constexpr text::PosTag rated[] = {text::PosTag::Noun,    text::PosTag::Verb,       text::PosTag::Adjective,
                                    text::PosTag::Adverb,  text::PosTag::Pronoun,    text::PosTag::Determiner,
                                    text::PosTag::Preposition};
  for (int i = 0; i < 7; ++i) {
    out[static_cast<std::size_t>(kTextPosNoun + i)] = n > 0 ? static_cast<double>(pos[static_cast<std::size_t>(rated[i])]) / n : 0.0;
  }
  return out;
}

UserProfile build_profile(std::string_view user_id, const std::vector<const CommentEvent*>& events,
                          const InterventionSpec& spec, const TextScorers& scorers, const TextOptions& options) {
  UserProfile p;
  p.user_id = std::string(user_id);
  const auto bins = static_cast<std::size_t>(spec.monthly_bins());
  for (auto& s : p.scope) s.monthly.assign(bins, 0);

  for (const CommentEvent* e : events) {
    double t = e->time();
    if (!spec.in_pre(t)) continue;
    Scope local = spec.is_banned(e->community_id) ? Scope::Banned : Scope::External;
    for (Scope s : {Scope::All, local}) {
      auto& sp = p.scope[static_cast<int>(s)];
      ++sp.comments;
      ++sp.communities[e->community_id];
      sp.vote_scores.push_back(static_cast<double>(e->vote_score));
      ++sp.monthly[static_cast<std::size_t>(spec.month_bin(t))];
      if (e->is_thread_root) ++sp.threads_started;
    }
    p.times.push_back(t);
    if (e->is_stickied) ++p.stickied;
    if (!e->is_thread_root) ++p.replies_made;
    if (options.skip_placeholder_bodies && is_placeholder_body(e->body)) continue;
    auto scores = score_comment(*e, scorers, options);
    for (int b = 0; b < kTextBaseCount; ++b) p.text[static_cast<std::size_t>(b)].add(scores[static_cast<std::size_t>(b)]);
    ++p.text_comments;
  }
  std::sort(p.times.begin(), p.times.end());
  return p;
}

}  // namespace abandon
