#include "abandon/features/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "abandon/common/error.hpp"
#include "abandon/common/hash.hpp"
#include "abandon/common/stats.hpp"
#include "abandon/features/profile.hpp"

namespace abandon {

using nlohmann::json;

std::string_view feature_class_name(FeatureClass c) {
  switch (c) {
    case FeatureClass::Activity: return "activity";
    case FeatureClass::Toxicity: return "toxicity";
    case FeatureClass::Style: return "style";
    case FeatureClass::Relational: return "relational";
  }
  return "?";
}

FeatureClass parse_feature_class(std::string_view name) {
  for (int i = 0; i < kFeatureClassCount; ++i) {
    auto c = static_cast<FeatureClass>(i);
    if (feature_class_name(c) == name) return c;
  }
  throw DataError("unknown feature class '" + std::string(name) + "'");
}

namespace {

constexpr double kNaN = stats::kNaN;

const char* const kTextBaseNames[kTextBaseCount] = {
    "toxicity",       "severe_toxicity",   "obscene",          "insult",          "identity_attack",
    "threat",         "sentiment_positive", "sentiment_negative", "sentiment_neutral", "sentiment_compound",
    "flesch_kincaid", "smog",              "pos_noun",         "pos_verb",        "pos_adjective",
    "pos_adverb",     "pos_pronoun",       "pos_determiner",   "pos_preposition"};

[[noreturn]] void bad_param(const FeatureEntry& e, const std::string& what) {
  throw DataError("feature '" + e.name + "' (" + e.extractor + "): " + what);
}

std::string str_param(const FeatureEntry& e, const char* key, std::initializer_list<const char*> allowed) {
  if (!e.params.contains(key) || !e.params.at(key).is_string()) bad_param(e, std::string("missing parameter '") + key + "'");
  auto v = e.params.at(key).get<std::string>();
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  bad_param(e, "invalid value '" + v + "' for '" + key + "'");
}

int int_param(const FeatureEntry& e, const char* key, int lo, int hi) {
  if (!e.params.contains(key) || !e.params.at(key).is_number_integer()) bad_param(e, std::string("missing integer '") + key + "'");
  int v = e.params.at(key).get<int>();
  if (v < lo || v > hi) bad_param(e, std::string("'") + key + "' out of range");
  return v;
}

Scope scope_param(const FeatureEntry& e, const char* key = "scope") {
  auto s = str_param(e, key, {"all", "banned", "external"});
  if (s == "all") return Scope::All;
  if (s == "banned") return Scope::Banned;
  return Scope::External;
}

double ratio(double num, double den) { return den == 0.0 ? kNaN : num / den; }

std::vector<double> gaps(const std::vector<double>& times) {
  std::vector<double> g;
  for (std::size_t i = 1; i < times.size(); ++i) g.push_back(times[i] - times[i - 1]);
  return g;
}

double summarize(std::vector<double> v, const std::string& stat) {
  if (v.empty()) return kNaN;
  if (stat == "mean") return stats::mean(v);
  if (stat == "std") return stats::pstdev(v);
  if (stat == "min") return *std::min_element(v.begin(), v.end());
  if (stat == "max") return *std::max_element(v.begin(), v.end());
  if (stat == "median") return stats::median(std::move(v));
  if (stat == "q25") return stats::quantile(std::move(v), 0.25);
  if (stat == "q75") return stats::quantile(std::move(v), 0.75);
  throw DataError("unknown statistic " + stat);
}

std::vector<double> to_doubles(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

double entropy(const std::map<std::string, std::size_t>& counts) {
  double total = 0;
  for (const auto& [_, c] : counts) total += static_cast<double>(c);
  if (total == 0) return kNaN;
  double h = 0;
  for (const auto& [_, c] : counts) {
    double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h + 0.0;
}

using Compiler = FeatureFn (*)(const FeatureEntry&);

const std::map<std::string, Compiler>& compilers() {
  static const std::map<std::string, Compiler> table = {
      {"comment_count",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.in(s).comments); };
       }},
      {"count_ratio",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope num = scope_param(e, "numerator"), den = scope_param(e, "denominator");
         return [num, den](const UserProfile& p, const CohortContext&) {
           return ratio(static_cast<double>(p.in(num).comments), static_cast<double>(p.in(den).comments));
         };
       }},
      {"monthly_trend",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return stats::ols_slope(to_doubles(p.in(s).monthly)); };
       }},
      {"gap_stat",
       [](const FeatureEntry& e) -> FeatureFn {
         auto stat = str_param(e, "stat", {"mean", "median", "std", "min", "max", "q25", "q75"});
         return [stat](const UserProfile& p, const CohortContext&) { return summarize(gaps(p.times), stat); };
       }},
      {"stickied_count",
       [](const FeatureEntry&) -> FeatureFn {
         return [](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.stickied); };
       }},
      {"active_days",
       [](const FeatureEntry&) -> FeatureFn {
         return [](const UserProfile& p, const CohortContext&) {
           std::set<std::int64_t> days;
           for (double t : p.times) days.insert(static_cast<std::int64_t>(std::floor(t / kSecondsPerDay)));
           return static_cast<double>(days.size());
         };
       }},
      {"comments_per_active_day",
       [](const FeatureEntry&) -> FeatureFn {
         return [](const UserProfile& p, const CohortContext&) {
           std::set<std::int64_t> days;
           for (double t : p.times) days.insert(static_cast<std::int64_t>(std::floor(t / kSecondsPerDay)));
           return ratio(static_cast<double>(p.times.size()), static_cast<double>(days.size()));
         };
       }},
      {"monthly_stat",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         auto stat = str_param(e, "stat", {"mean", "std", "min", "max", "median"});
         return [s, stat](const UserProfile& p, const CohortContext&) { return summarize(to_doubles(p.in(s).monthly), stat); };
       }},
      {"active_months",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) {
           const auto& m = p.in(s).monthly;
           return static_cast<double>(std::count_if(m.begin(), m.end(), [](std::size_t c) { return c > 0; }));
         };
       }},
      {"month_share",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         bool first = str_param(e, "which", {"first", "last"}) == "first";
         return [s, first](const UserProfile& p, const CohortContext&) {
           const auto& sp = p.in(s);
           if (sp.monthly.empty()) return kNaN;
           double c = static_cast<double>(first ? sp.monthly.front() : sp.monthly.back());
           return ratio(c, static_cast<double>(sp.comments));
         };
       }},
      {"days_before_t0",
       [](const FeatureEntry& e) -> FeatureFn {
         bool last = str_param(e, "which", {"first", "last"}) == "last";
         return [last](const UserProfile& p, const CohortContext& ctx) {
           if (p.times.empty()) return kNaN;
           double t = last ? p.times.back() : p.times.front();
           return (static_cast<double>(ctx.spec.t0) - t) / static_cast<double>(kSecondsPerDay);
         };
       }},
      {"community_count",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.in(s).communities.size()); };
       }},
      {"late_share",
       [](const FeatureEntry& e) -> FeatureFn {
         int k = int_param(e, "bins", 1, 1000);
         return [k](const UserProfile& p, const CohortContext&) {
           const auto& m = p.in(Scope::All).monthly;
           std::size_t n = m.size(), kk = std::min<std::size_t>(static_cast<std::size_t>(k), n / 2);
           double early = 0, late = 0;
           for (std::size_t i = 0; i < kk; ++i) {
             early += static_cast<double>(m[i]);
             late += static_cast<double>(m[n - 1 - i]);
           }
           return ratio(late, early + late);
         };
       }},
      {"weekday_share",
       [](const FeatureEntry& e) -> FeatureFn {
         if (!e.params.contains("days") || !e.params.at("days").is_array()) bad_param(e, "missing 'days' list");
         std::array<bool, 7> days{};
         for (const auto& d : e.params.at("days")) {
           int v = d.get<int>();
           if (v < 0 || v > 6) bad_param(e, "weekday out of range (0 = Sunday)");
           days[static_cast<std::size_t>(v)] = true;
         }
         return [days](const UserProfile& p, const CohortContext&) {
           std::size_t hit = 0;
           for (double t : p.times) {
             auto day = static_cast<std::int64_t>(std::floor(t / kSecondsPerDay));
             if (days[static_cast<std::size_t>(((day + 4) % 7 + 7) % 7)]) ++hit;
           }
           return ratio(static_cast<double>(hit), static_cast<double>(p.times.size()));
         };
       }},
      {"hour_share",
       [](const FeatureEntry& e) -> FeatureFn {
         int from = int_param(e, "from", 0, 23), to = int_param(e, "to", 1, 24);
         if (to <= from) bad_param(e, "'to' must exceed 'from'");
         return [from, to](const UserProfile& p, const CohortContext&) {
           std::size_t hit = 0;
           for (double t : p.times) {
             double sec = std::fmod(t, static_cast<double>(kSecondsPerDay));
             int hour = static_cast<int>(sec / 3600.0);
             if (hour >= from && hour < to) ++hit;
           }
           return ratio(static_cast<double>(hit), static_cast<double>(p.times.size()));
         };
       }},
      {"text_stat",
       [](const FeatureEntry& e) -> FeatureFn {
         if (!e.params.contains("base") || !e.params.at("base").is_string()) bad_param(e, "missing 'base'");
         auto base_name = e.params.at("base").get<std::string>();
         int base = -1;
         for (int i = 0; i < kTextBaseCount; ++i) {
           if (base_name == kTextBaseNames[i]) base = i;
         }
         if (base < 0) bad_param(e, "unknown text base '" + base_name + "'");
         auto stat = str_param(e, "stat", {"mean", "min", "max", "std"});
         return [base, stat](const UserProfile& p, const CohortContext&) {
           const auto& rs = p.text[static_cast<std::size_t>(base)];
           if (stat == "mean") return rs.mean();
           if (stat == "min") return rs.min();
           if (stat == "max") return rs.max();
           return rs.pstdev();
         };
       }},
      {"influence_rank",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext& ctx) {
           const auto& v = p.in(s).vote_scores;
           return v.empty() ? kNaN : ctx.rank_percentile(s, stats::mean(v));
         };
       }},
      {"vote_stat",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         auto stat = str_param(e, "stat", {"mean", "std", "min", "max", "median"});
         return [s, stat](const UserProfile& p, const CohortContext&) { return summarize(p.in(s).vote_scores, stat); };
       }},
      {"community_ratio",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope num = scope_param(e, "numerator"), den = scope_param(e, "denominator");
         return [num, den](const UserProfile& p, const CohortContext&) {
           return ratio(static_cast<double>(p.in(num).communities.size()), static_cast<double>(p.in(den).communities.size()));
         };
       }},
      {"threads_started",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.in(s).threads_started); };
       }},
      {"thread_ratio",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) {
           return ratio(static_cast<double>(p.in(s).threads_started), static_cast<double>(p.in(s).comments));
         };
       }},
      {"in_degree",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.in(s).repliers.size()); };
       }},
      {"out_degree",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.in(s).replied_to.size()); };
       }},
      {"replies_received",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.in(s).replies_received); };
       }},
      {"replies_made",
       [](const FeatureEntry&) -> FeatureFn {
         return [](const UserProfile& p, const CohortContext&) { return static_cast<double>(p.replies_made); };
       }},
      {"reciprocity",
       [](const FeatureEntry&) -> FeatureFn {
         return [](const UserProfile& p, const CohortContext&) {
           const auto& in = p.in(Scope::All).repliers;
           const auto& out = p.in(Scope::All).replied_to;
           std::size_t both = 0;
           for (const auto& u : in) both += out.count(u);
           std::size_t either = in.size() + out.size() - both;
           return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
         };
       }},
      {"negative_vote_share",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) {
           const auto& v = p.in(s).vote_scores;
           auto neg = std::count_if(v.begin(), v.end(), [](double x) { return x < 0; });
           return ratio(static_cast<double>(neg), static_cast<double>(v.size()));
         };
       }},
      {"top_community_share",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) {
           std::size_t top = 0;
           for (const auto& [_, c] : p.in(s).communities) top = std::max(top, c);
           return ratio(static_cast<double>(top), static_cast<double>(p.in(s).comments));
         };
       }},
      {"community_entropy",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) { return entropy(p.in(s).communities); };
       }},
      {"replies_per_comment",
       [](const FeatureEntry& e) -> FeatureFn {
         Scope s = scope_param(e);
         return [s](const UserProfile& p, const CohortContext&) {
           return ratio(static_cast<double>(p.in(s).replies_received), static_cast<double>(p.in(s).comments));
         };
       }},
  };
  return table;
}

json builtin_json() {
  json features = json::array();
  auto add = [&](const char* name, const char* cls, const char* extractor, json params = json::object()) {
    features.push_back({{"name", name}, {"class", cls}, {"extractor", extractor}, {"params", std::move(params)}});
  };
  const char* A = "activity";
  add("n_comments", A, "comment_count", {{"scope", "all"}});
  add("n_comments_int", A, "comment_count", {{"scope", "banned"}});
  add("n_comments_ext", A, "comment_count", {{"scope", "external"}});
  add("comment_ratio", A, "count_ratio", {{"numerator", "external"}, {"denominator", "banned"}});
  add("trend_all", A, "monthly_trend", {{"scope", "all"}});
  add("trend_int", A, "monthly_trend", {{"scope", "banned"}});
  add("trend_ext", A, "monthly_trend", {{"scope", "external"}});
  add("time_diff", A, "gap_stat", {{"stat", "mean"}});
  add("time_diff_median", A, "gap_stat", {{"stat", "median"}});
  add("time_diff_std", A, "gap_stat", {{"stat", "std"}});
  add("time_diff_min", A, "gap_stat", {{"stat", "min"}});
  add("time_diff_max", A, "gap_stat", {{"stat", "max"}});
  add("time_diff_q25", A, "gap_stat", {{"stat", "q25"}});
  add("time_diff_q75", A, "gap_stat", {{"stat", "q75"}});
  add("n_stickied", A, "stickied_count");
  add("active_days", A, "active_days");
  add("comments_per_day", A, "comments_per_active_day");
  add("monthly_mean", A, "monthly_stat", {{"scope", "all"}, {"stat", "mean"}});
  add("monthly_std", A, "monthly_stat", {{"scope", "all"}, {"stat", "std"}});
  add("monthly_min", A, "monthly_stat", {{"scope", "all"}, {"stat", "min"}});
  add("monthly_max", A, "monthly_stat", {{"scope", "all"}, {"stat", "max"}});
  add("active_months_ext", A, "active_months", {{"scope", "external"}});
  add("first_month_share", A, "month_share", {{"scope", "all"}, {"which", "first"}});
  add("last_month_share", A, "month_share", {{"scope", "all"}, {"which", "last"}});
  add("recency_days", A, "days_before_t0", {{"which", "last"}});
  add("tenure_days", A, "days_before_t0", {{"which", "first"}});
  add("n_communities", A, "community_count", {{"scope", "all"}});
  add("late_share", A, "late_share", {{"bins", 3}});
  add("weekend_share", A, "weekday_share", {{"days", {0, 6}}});
  add("night_share", A, "hour_share", {{"from", 0}, {"to", 6}});

  struct Base {
    const char* label;
    const char* base;
  };
  const Base tox[] = {{"toxicity", "toxicity"},        {"sev_toxicity", "severe_toxicity"},
                      {"obscene", "obscene"},          {"insult", "insult"},
                      {"id_attack", "identity_attack"}, {"threat", "threat"},
                      {"sent_pos", "sentiment_positive"}, {"sent_neg", "sentiment_negative"},
                      {"sent_neu", "sentiment_neutral"},  {"sent_compound", "sentiment_compound"}};
  const Base style[] = {{"fk_grade", "flesch_kincaid"}, {"smog", "smog"},         {"pos_noun", "pos_noun"},
                        {"pos_verb", "pos_verb"},       {"pos_adj", "pos_adjective"}, {"pos_adv", "pos_adverb"},
                        {"pos_pron", "pos_pronoun"},    {"pos_det", "pos_determiner"}, {"pos_prep", "pos_preposition"}};
  const std::pair<const char*, const char*> stats_[] = {{"avg", "mean"}, {"min", "min"}, {"max", "max"}, {"std", "std"}};
  for (const auto& b : tox) {
    for (const auto& [prefix, stat] : stats_) {
      add((std::string(prefix) + "_" + b.label).c_str(), "toxicity", "text_stat", {{"base", b.base}, {"stat", stat}});
    }
  }
  for (const auto& b : style) {
    for (const auto& [prefix, stat] : stats_) {
      add((std::string(prefix) + "_" + b.label).c_str(), "style", "text_stat", {{"base", b.base}, {"stat", stat}});
    }
  }

  const char* R = "relational";
  add("influence_int", R, "influence_rank", {{"scope", "banned"}});
  add("influence_ext", R, "influence_rank", {{"scope", "external"}});
  add("influence_all", R, "influence_rank", {{"scope", "all"}});
  add("avg_score_int", R, "vote_stat", {{"scope", "banned"}, {"stat", "mean"}});
  add("avg_score_ext", R, "vote_stat", {{"scope", "external"}, {"stat", "mean"}});
  add("avg_score_all", R, "vote_stat", {{"scope", "all"}, {"stat", "mean"}});
  add("part_ratio", R, "community_ratio", {{"numerator", "external"}, {"denominator", "banned"}});
  add("n_communities_int", R, "community_count", {{"scope", "banned"}});
  add("n_communities_ext", R, "community_count", {{"scope", "external"}});
  add("banned_share", R, "count_ratio", {{"numerator", "banned"}, {"denominator", "all"}});
  add("threads_started", R, "threads_started", {{"scope", "all"}});
  add("threads_started_int", R, "threads_started", {{"scope", "banned"}});
  add("threads_started_ext", R, "threads_started", {{"scope", "external"}});
  add("thread_ratio", R, "thread_ratio", {{"scope", "all"}});
  add("thread_ratio_int", R, "thread_ratio", {{"scope", "banned"}});
  add("thread_ratio_ext", R, "thread_ratio", {{"scope", "external"}});
  add("in_degree", R, "in_degree", {{"scope", "all"}});
  add("out_degree", R, "out_degree", {{"scope", "all"}});
  add("in_degree_int", R, "in_degree", {{"scope", "banned"}});
  add("out_degree_int", R, "out_degree", {{"scope", "banned"}});
  add("in_degree_ext", R, "in_degree", {{"scope", "external"}});
  add("out_degree_ext", R, "out_degree", {{"scope", "external"}});
  add("replies_received", R, "replies_received", {{"scope", "all"}});
  add("replies_made", R, "replies_made");
  add("reciprocity", R, "reciprocity");
  add("score_std_int", R, "vote_stat", {{"scope", "banned"}, {"stat", "std"}});
  add("score_std_ext", R, "vote_stat", {{"scope", "external"}, {"stat", "std"}});
  add("score_max", R, "vote_stat", {{"scope", "all"}, {"stat", "max"}});
  add("score_min", R, "vote_stat", {{"scope", "all"}, {"stat", "min"}});
  add("score_median", R, "vote_stat", {{"scope", "all"}, {"stat", "median"}});
  add("negative_score_share", R, "negative_vote_share", {{"scope", "all"}});
  add("top_community_share", R, "top_community_share", {{"scope", "all"}});
  add("community_entropy", R, "community_entropy", {{"scope", "all"}});
  add("community_entropy_int", R, "community_entropy", {{"scope", "banned"}});
  add("community_entropy_ext", R, "community_entropy", {{"scope", "external"}});
  add("replies_per_comment", R, "replies_per_comment", {{"scope", "all"}});
  return json{{"version", "1.0"}, {"features", features}};
}

}  // namespace

FeatureFn compile_feature(const FeatureEntry& entry) {
  auto it = compilers().find(entry.extractor);
  if (it == compilers().end()) throw DataError("feature '" + entry.name + "': unknown extractor '" + entry.extractor + "'");
  return it->second(entry);
}

FeatureRegistry FeatureRegistry::from_json(const json& j) {
  if (!j.is_object() || !j.contains("features") || !j.at("features").is_array()) {
    throw DataError("feature registry must be an object with a 'features' array");
  }
  FeatureRegistry r;
  r.version_ = j.value("version", std::string("unversioned"));
  std::set<std::string> seen;
  std::array<int, kFeatureClassCount> per_class{};
  for (const auto& f : j.at("features")) {
    FeatureEntry e;
    try {
      e.name = f.at("name").get<std::string>();
      e.cls = parse_feature_class(f.at("class").get<std::string>());
      e.extractor = f.at("extractor").get<std::string>();
      if (f.contains("params")) e.params = f.at("params");
    } catch (const json::exception& ex) {
      throw DataError(std::string("malformed registry entry: ") + ex.what());
    }
    if (!seen.insert(e.name).second) throw DataError("duplicate feature name '" + e.name + "' in registry");
    ++per_class[static_cast<std::size_t>(e.cls)];
    r.compiled_.push_back(compile_feature(e));
    r.entries_.push_back(std::move(e));
  }
  if (static_cast<int>(r.entries_.size()) != kExpectedFeatureCount) {
    throw DataError("feature registry has " + std::to_string(r.entries_.size()) + " entries, expected " +
                    std::to_string(kExpectedFeatureCount));
  }
  for (int c = 0; c < kFeatureClassCount; ++c) {
    if (per_class[static_cast<std::size_t>(c)] != kExpectedClassSizes[static_cast<std::size_t>(c)]) {
      throw DataError("feature registry class '" + std::string(feature_class_name(static_cast<FeatureClass>(c))) +
                      "' has " + std::to_string(per_class[static_cast<std::size_t>(c)]) + " entries, expected " +
                      std::to_string(kExpectedClassSizes[static_cast<std::size_t>(c)]));
    }
  }
  r.hash_ = hash_hex(r.to_json().dump());
  return r;
}

FeatureRegistry FeatureRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read feature registry " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("feature registry " + path.string() + " is not valid JSON");
  return from_json(j);
}

const FeatureRegistry& FeatureRegistry::builtin() {
  static const FeatureRegistry r = from_json(builtin_json());
  return r;
}

json FeatureRegistry::to_json() const {
  json features = json::array();
  for (const auto& e : entries_) {
    features.push_back({{"name", e.name},
                        {"class", std::string(feature_class_name(e.cls))},
                        {"extractor", e.extractor},
                        {"params", e.params}});
  }
  return json{{"version", version_}, {"features", features}};
}

void FeatureRegistry::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

std::vector<std::string> FeatureRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::vector<FeatureClass> FeatureRegistry::classes() const {
  std::vector<FeatureClass> out;
  for (const auto& e : entries_) out.push_back(e.cls);
  return out;
}

std::size_t FeatureRegistry::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  throw UsageError("unknown feature '" + std::string(name) + "'");
}

}  // namespace abandon
