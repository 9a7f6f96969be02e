#include "abandon/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include <zlib.h>

#include "abandon/common/error.hpp"
#include "abandon/common/parallel.hpp"
#include "abandon/common/rng.hpp"
#include "abandon/ingest/parse.hpp"

namespace abandon {

using nlohmann::json;

namespace {

constexpr std::uint64_t kLatentStream = 0x1a7e;
constexpr std::uint64_t kPreStream = 0xe7e;
constexpr std::uint64_t kPostStream = 0xe7f;
constexpr std::uint64_t kGroupStream = 0x6e0;
constexpr std::uint64_t kReplyStream = 0x4e9;

// How strongly each latent value shows in behaviour.
constexpr std::size_t kReplyWindow = 256;
constexpr double kTrendPerMonth = 0.3;      // log-rate slope of external activity per unit latent
constexpr double kPaceScale = 0.45;         // log-rate change per unit gap latent
constexpr double kExternalCommunities = 3.0;
constexpr double kParticipationScale = 0.7;
constexpr double kIdentityIntercept = -2.2;
constexpr double kIdentityScale = 1.5;
constexpr double kBannedTrendSpread = 0.2;
constexpr double kExternalRateSpread = 0.3;
constexpr double kVoteCenter = 1.0;
constexpr double kVoteSpread = 0.9;
constexpr double kInfluenceSpread = 0.6;
constexpr double kInsultRate = 0.04;

const char* const kWords[] = {
    "people",  "thread",  "post",    "think",   "really",  "good",    "time",    "thing",   "same",   "world",
    "point",   "never",   "always",  "because", "about",   "should",  "would",   "could",   "right",  "wrong",
    "game",    "news",    "video",   "story",   "work",    "money",   "city",    "school",  "music",  "movie",
    "answer",  "question", "reason", "place",   "friend",  "market",  "change",  "problem", "idea",   "group",
    "simple",  "strange", "happy",   "quick",   "careful", "honest",  "little",  "other",   "every",  "still",
    "read",    "write",   "agree",   "believe", "explain", "remember", "watch",  "follow",  "share",  "happen"};
const char* const kOpeners[] = {"I", "You", "They", "We", "This", "That", "Nobody", "Everyone"};
const char* const kIdentityTerms[] = {"subhuman", "vermin", "invaders", "degenerates", "parasites", "savages"};
const char* const kInsultTerms[] = {"idiot", "stupid", "moron", "clown"};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&words)[N]) {
  return words[rng.index(N)];
}

double logistic_fn(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string base36(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out;
  do {
    out.push_back(kDigits[v % 36]);
    v /= 36;
  } while (v > 0);
  std::reverse(out.begin(), out.end());
  return out;
}

std::string make_body(Rng& rng, double identity_rate, bool& planted) {
  std::string body;
  const int sentences = 1 + static_cast<int>(rng.index(2));
  const bool identity = rng.bernoulli(identity_rate);
  planted = identity;
  const bool insult = rng.bernoulli(kInsultRate);
  const int planted_in = static_cast<int>(rng.index(static_cast<std::size_t>(sentences)));
  for (int s = 0; s < sentences; ++s) {
    if (!body.empty()) body += ' ';
    body += pick(rng, kOpeners);
    const int words = 4 + static_cast<int>(rng.index(7));
    for (int w = 0; w < words; ++w) {
      body += ' ';
      body += pick(rng, kWords);
    }
    if (s == planted_in && identity) {
      body += " those ";
      body += pick(rng, kIdentityTerms);
    }
    if (s == planted_in && insult) {
      body += ", ";
      body += pick(rng, kInsultTerms);
    }
    body += rng.bernoulli(0.15) ? '?' : '.';
  }
  return body;
}

void check_share(double v, const char* name) {
  if (!(v >= 0 && v <= 1)) throw UsageError(std::string(name) + " must lie in [0, 1]");
}

void check_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) throw UsageError(std::string(name) + " must be positive and finite");
}

// Distributes `total` over `weights` by the largest-remainder rule; ties go
// to the lower index.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size(), 0);
  if (sum <= 0 || total == 0) return out;
  std::vector<std::pair<double, std::size_t>> rest;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    used += out[i];
    rest.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++out[rest[k % rest.size()].second];
  return out;
}

using Membership = std::vector<std::size_t>;

// Group sets with a realized count each, from the configured sizes and
// dual-membership share.
std::vector<std::pair<Membership, double>> default_memberships(const SynthConfig& c) {
  const std::size_t g = c.n_banned_groups;
  std::vector<double> w(g);
  for (std::size_t i = 0; i < g; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), c.group_size_skew);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<std::pair<Membership, double>> out;
  const double dual = g >= 2 ? c.dual_membership : 0.0;
  for (std::size_t i = 0; i < g; ++i) out.push_back({{i}, (1 - dual) * w[i] / wsum});
  if (dual > 0) {
    double psum = 0;
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t j = i + 1; j < g; ++j) psum += w[i] * w[j];
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t j = i + 1; j < g; ++j) out.push_back({{i, j}, dual * w[i] * w[j] / psum});
  }
  return out;
}

// Group sizes follow from the target through o_ij * N_i = o_ji * N_j (the
// shared users counted from either side); the remaining members of each
// group belong to it alone.
std::vector<std::pair<Membership, double>> target_memberships(const SynthConfig& c) {
  const auto& o = c.overlap_target;
  const std::size_t g = c.n_banned_groups;
  for (std::size_t i = 0; i < g; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < g; ++j) {
      if (i == j) continue;
      const double v = o[i][j];
      if (!(v >= 0 && v <= 100)) throw UsageError("overlap target entries must be percentages in [0, 100]");
      if ((v > 0) != (o[j][i] > 0)) {
        throw UsageError("infeasible overlap target: group " + std::to_string(i) + " shares users with group " +
                         std::to_string(j) + " but not the other way round");
      }
      row += v;
    }
    if (row > 100 + 1e-9) {
      throw UsageError("infeasible overlap target: row " + std::to_string(i) + " sums to " + std::to_string(row) +
                       "% but a user belongs to at most two groups, so the shares of one group's members in the "
                       "others cannot exceed 100%");
    }
  }
  std::vector<double> size(g, 0.0);
  for (std::size_t root = 0; root < g; ++root) {
    if (size[root] > 0) continue;
    size[root] = 1.0;
    std::queue<std::size_t> todo;
    todo.push(root);
    while (!todo.empty()) {
      const auto i = todo.front();
      todo.pop();
      for (std::size_t j = 0; j < g; ++j) {
        if (i == j || o[i][j] <= 0) continue;
        const double implied = size[i] * o[i][j] / o[j][i];
        if (size[j] == 0) {
          size[j] = implied;
          todo.push(j);
        } else if (std::fabs(size[j] - implied) > 1e-6 * std::max(size[j], implied)) {
          throw UsageError("infeasible overlap target: the ratios o_ij / o_ji imply contradictory sizes for group " +
                           std::to_string(j) + " (shared users must be the same count seen from either group)");
        }
      }
    }
  }
  std::vector<std::pair<Membership, double>> out;
  for (std::size_t i = 0; i < g; ++i) {
    double alone = size[i];
    for (std::size_t j = 0; j < g; ++j)
      if (j != i) alone -= size[i] * o[i][j] / 100.0;
    out.push_back({{i}, std::max(0.0, alone)});
  }
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = i + 1; j < g; ++j)
      if (o[i][j] > 0) out.push_back({{i, j}, size[i] * o[i][j] / 100.0});
  return out;
}

std::vector<Membership> assign_memberships(const SynthConfig& c) {
  auto kinds = c.overlap_target.empty() ? default_memberships(c) : target_memberships(c);
  std::vector<double> w;
  for (const auto& k : kinds) w.push_back(k.second);
  auto counts = apportion(w, c.n_users);
  std::vector<Membership> out;
  for (std::size_t k = 0; k < kinds.size(); ++k)
    for (std::size_t r = 0; r < counts[k]; ++r) out.push_back(kinds[k].first);
  Rng rng(derive_seed(c.seed, kGroupStream));
  rng.shuffle(out);
  return out;
}

struct UserPlan {
  std::size_t index = 0;
  std::array<double, 4> latent{};
  double banned_trend = 0;
  double external_scale = 1;
  double influence = 0;
  double pace = 1;
  double external_slope = 0;
  double identity_rate = 0;
  std::vector<std::size_t> external_communities;
};

// Draws unique whole-second timestamps; consecutive comments are therefore
// at least a second apart.
class Clock {
 public:
  explicit Clock(Rng& rng) : rng_(rng) {}
  std::int64_t draw(std::int64_t lo, std::int64_t hi) {
    for (;;) {
      auto t = rng_.integer(lo, hi);
      if (used_.insert(t).second) return t;
    }
  }

 private:
  Rng& rng_;
  std::set<std::int64_t> used_;
};

struct PendingEvent {
  CommentEvent event;
  bool reply = false;
};

// Behaviour measured on a user's pre-period comments, by SignalConcept.
using Realized = std::array<double, 4>;

class EventWriter {
 public:
  EventWriter(const SynthConfig& c, const UserPlan& plan, const SynthUser& user, std::uint64_t stream,
              std::size_t first_serial)
      : c_(c), plan_(plan), user_(user), rng_(derive_seed(c.seed, stream, plan.index)), clock_(rng_),
        serial_(first_serial) {}

  Rng& rng() { return rng_; }
  std::int64_t draw(std::int64_t lo, std::int64_t hi) { return clock_.draw(lo, hi); }
  std::string external() {
    return external_community_name(plan_.external_communities[rng_.index(plan_.external_communities.size())]);
  }

  // Returns whether the body carries an identity attack.
  bool emit(std::int64_t t, std::string community) {
    PendingEvent p;
    auto& e = p.event;
    e.event_id = "c" + base36(plan_.index) + "x" + base36(serial_++);
    e.user_id = user_.user_id;
    e.community_id = std::move(community);
    e.timestamp = t;
    bool planted = false;
    e.body = make_body(rng_, plan_.identity_rate, planted);
    e.vote_score = std::llround(std::exp(kVoteCenter + plan_.influence + kVoteSpread * rng_.normal())) - 1;
    e.is_stickied = rng_.bernoulli(c_.stickied_share);
    p.reply = rng_.bernoulli(c_.reply_share);
    if (!p.reply) e.parent_id = "t3_" + base36(rng_.next() % 2176782336ULL);
    events_.push_back(std::move(p));
    return planted;
  }

  std::vector<PendingEvent>& events() { return events_; }
  std::size_t serial() const { return serial_; }

 private:
  const SynthConfig& c_;
  const UserPlan& plan_;
  const SynthUser& user_;
  Rng rng_;
  Clock clock_;
  std::size_t serial_;
  std::vector<PendingEvent> events_;
};

double slope_of(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size()), xbar = (n - 1) / 2.0;
  double ybar = 0, sxy = 0, sxx = 0;
  for (double v : y) ybar += v / n;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i) - xbar;
    sxy += dx * (y[i] - ybar);
    sxx += dx * dx;
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

std::vector<PendingEvent> pre_events(const SynthConfig& c, const InterventionSpec& spec, const UserPlan& plan,
                                     const SynthUser& user, Realized& realized) {
  EventWriter w(c, plan, user, kPreStream, 0);
  const std::int64_t bin_len = kDaysPerBin * kSecondsPerDay;
  const int bins = spec.monthly_bins();
  std::vector<double> monthly_external(static_cast<std::size_t>(bins), 0.0);
  std::set<std::string> external_used;
  std::vector<std::int64_t> times;
  std::size_t identity = 0, total = 0;
  auto emit = [&](std::int64_t t, std::string community, bool is_external, int bin) {
    if (is_external) {
      external_used.insert(community);
      monthly_external[static_cast<std::size_t>(bin)] += 1;
    }
    identity += w.emit(t, std::move(community)) ? 1 : 0;
    times.push_back(t);
    ++total;
  };
  for (int b = 0; b < bins; ++b) {
    const std::int64_t lo = spec.pre_start() + b * bin_len;
    const std::int64_t hi = std::min(lo + bin_len, spec.t0) - 1;
    const double centered = b - (bins - 1) / 2.0;
    for (auto g : user.groups) {
      // Two guaranteed comments per block keep every member consistent and
      // above the participation threshold.
      const int n = 2 + w.rng().poisson(c.banned_rate * plan.pace * std::exp(plan.banned_trend * centered));
      for (int k = 0; k < n; ++k) emit(w.draw(lo, hi), banned_group_name(g), false, b);
    }
    const double rate = c.external_rate * plan.external_scale * plan.pace * std::exp(plan.external_slope * centered);
    const int n = w.rng().poisson(rate);
    for (int k = 0; k < n; ++k) emit(w.draw(lo, hi), w.external(), true, b);
  }
  if (external_used.empty()) {
    const int b = static_cast<int>(w.rng().index(static_cast<std::size_t>(bins)));
    const std::int64_t lo = spec.pre_start() + b * bin_len;
    emit(w.draw(lo, std::min(lo + bin_len, spec.t0) - 1), w.external(), true, b);
  }
  std::sort(times.begin(), times.end());
  const double mean_gap =
      static_cast<double>(times.back() - times.front()) / static_cast<double>(std::max<std::size_t>(1, total - 1));
  realized[static_cast<int>(SignalConcept::ExternalTrend)] = slope_of(monthly_external);
  realized[static_cast<int>(SignalConcept::ParticipationRatio)] =
      static_cast<double>(external_used.size()) / static_cast<double>(user.groups.size());
  realized[static_cast<int>(SignalConcept::IdentityAttack)] = static_cast<double>(identity) / static_cast<double>(total);
  realized[static_cast<int>(SignalConcept::CommentGap)] = std::log(std::max(1.0, mean_gap));
  return std::move(w.events());
}

std::vector<PendingEvent> post_events(const SynthConfig& c, const InterventionSpec& spec, const UserPlan& plan,
                                      const SynthUser& user, std::size_t first_serial) {
  if (user.hard) return {};
  EventWriter w(c, plan, user, kPostStream, first_serial);
  const int bins = spec.monthly_bins();
  const std::int64_t window = spec.soft_window_start();
  const double rate =
      std::clamp(c.external_rate * plan.external_scale * plan.pace * std::exp(plan.external_slope * (bins + 1) / 2.0),
                 0.5, 60.0);
  const double months = static_cast<double>(spec.post_days) / kDaysPerBin;
  const std::int64_t lo = spec.t0 + 1;
  // Soft abandoners stay quiet from the window start on.
  const std::int64_t hi = user.soft ? window - 1 : spec.post_end();
  const double span = static_cast<double>(hi - lo + 1) / static_cast<double>(spec.post_end() - spec.t0);
  const int n = w.rng().poisson(rate * months * span);
  bool in_window = false;
  for (int k = 0; k < n; ++k) {
    auto t = w.draw(lo, hi);
    in_window = in_window || t >= window;
    w.emit(t, w.external());
  }
  if (user.soft && n == 0) w.emit(w.draw(lo, hi), w.external());
  if (!user.soft && !in_window) w.emit(w.draw(window, spec.post_end()), w.external());
  return std::move(w.events());
}

}  // namespace

std::string_view signal_concept_name(SignalConcept c) {
  switch (c) {
    case SignalConcept::ExternalTrend: return "external_trend";
    case SignalConcept::ParticipationRatio: return "participation_ratio";
    case SignalConcept::IdentityAttack: return "identity_attack";
    case SignalConcept::CommentGap: return "comment_gap";
  }
  return "?";
}

SignalConcept parse_signal_concept(std::string_view name) {
  for (auto c : kAllSignalConcepts)
    if (signal_concept_name(c) == name) return c;
  throw UsageError("unknown signal concept '" + std::string(name) +
                   "' (expected external_trend, participation_ratio, identity_attack or comment_gap)");
}

std::string banned_group_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "banned_%02zu", i);
  return buf;
}

std::string external_community_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "community_%03zu", i);
  return buf;
}

std::string synth_user_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user_%07zu", i);
  return buf;
}

void SynthConfig::validate() const {
  if (n_users < 10) throw UsageError("synthetic cohorts need at least 10 users");
  if (n_banned_groups == 0 || n_banned_groups > 1000) throw UsageError("banned group count must lie in [1, 1000]");
  if (n_nonbanned_groups == 0 || n_nonbanned_groups > 100000)
    throw UsageError("non-banned community count must lie in [1, 100000]");
  if (!(hard_prior > 0 && hard_prior < 1) || !(soft_prior > 0 && soft_prior < 1))
    throw UsageError("label priors must lie in (0, 1)");
  if (hard_prior > soft_prior) throw UsageError("the hard prior cannot exceed the soft prior (hard positives are soft)");
  for (const auto& [signal, effect] : effects) {
    if (!std::isfinite(effect))
      throw UsageError("effect size for " + std::string(signal_concept_name(signal)) + " must be finite");
  }
  if (!(label_noise >= 0) || !std::isfinite(label_noise)) throw UsageError("label_noise must be finite and >= 0");
  check_share(dual_membership, "dual_membership");
  if (!(group_size_skew >= 0) || !std::isfinite(group_size_skew)) throw UsageError("group_size_skew must be >= 0");
  check_positive(banned_rate, "banned_rate");
  check_positive(external_rate, "external_rate");
  check_share(reply_share, "reply_share");
  check_share(stickied_share, "stickied_share");
  if (!overlap_target.empty()) {
    if (overlap_target.size() != n_banned_groups)
      throw UsageError("overlap target must be a square matrix with one row per banned group");
    for (const auto& row : overlap_target)
      if (row.size() != n_banned_groups)
        throw UsageError("overlap target must be a square matrix with one row per banned group");
  }
  intervention.validate();
}

json SynthConfig::to_json() const {
  json eff = json::object();
  for (auto c : kAllSignalConcepts) {
    auto it = effects.find(c);
    eff[std::string(signal_concept_name(c))] = it == effects.end() ? 0.0 : it->second;
  }
  auto iv = intervention.to_json();
  iv.erase("banned_communities");
  return {{"users", n_users},
          {"banned_groups", n_banned_groups},
          {"nonbanned_groups", n_nonbanned_groups},
          {"hard_prior", hard_prior},
          {"soft_prior", soft_prior},
          {"effects", eff},
          {"label_noise", label_noise},
          {"overlap_target", overlap_target},
          {"dual_membership", dual_membership},
          {"group_size_skew", group_size_skew},
          {"banned_rate", banned_rate},
          {"external_rate", external_rate},
          {"reply_share", reply_share},
          {"stickied_share", stickied_share},
          {"intervention", iv},
          {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("synthetic cohort settings must be a JSON object");
  SynthConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "users") c.n_users = v.get<std::size_t>();
    else if (key == "banned_groups") c.n_banned_groups = v.get<std::size_t>();
    else if (key == "nonbanned_groups") c.n_nonbanned_groups = v.get<std::size_t>();
    else if (key == "hard_prior") c.hard_prior = v.get<double>();
    else if (key == "soft_prior") c.soft_prior = v.get<double>();
    else if (key == "effects") {
      if (!v.is_object()) throw UsageError("effects must map concept names to numbers");
      for (const auto& [name, e] : v.items()) c.effects[parse_signal_concept(name)] = e.get<double>();
    } else if (key == "label_noise") c.label_noise = v.get<double>();
    else if (key == "overlap_target") c.overlap_target = v.get<std::vector<std::vector<double>>>();
    else if (key == "dual_membership") c.dual_membership = v.get<double>();
    else if (key == "group_size_skew") c.group_size_skew = v.get<double>();
    else if (key == "banned_rate") c.banned_rate = v.get<double>();
    else if (key == "external_rate") c.external_rate = v.get<double>();
    else if (key == "reply_share") c.reply_share = v.get<double>();
    else if (key == "stickied_share") c.stickied_share = v.get<double>();
    else if (key == "intervention") c.intervention = InterventionSpec::from_json(v);
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else throw UsageError("unknown synthetic cohort setting '" + key + "'");
  }
  c.validate();
  return c;
}

Matrix SynthData::overlap() const {
  const std::size_t g = config.n_banned_groups;
  Matrix shared(g, g, 0.0);
  for (const auto& u : users)
    for (auto a : u.groups)
      for (auto b : u.groups) shared(a, b) += 1;
  Matrix out(g, g, 0.0);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) out(i, j) = shared(i, i) > 0 ? 100.0 * shared(i, j) / shared(i, i) : 0.0;
  return out;
}

std::vector<int> SynthData::labels(Task task) const {
  std::vector<int> out;
  out.reserve(users.size());
  for (const auto& u : users) out.push_back(task == Task::Hard ? u.hard : u.soft);
  return out;
}

std::vector<std::string> SynthData::user_ids() const {
  std::vector<std::string> out;
  out.reserve(users.size());
  for (const auto& u : users) out.push_back(u.user_id);
  return out;
}

SynthData generate(const SynthConfig& config) {
  SynthData data;
  data.config = config;
  data.intervention = config.intervention;
  data.intervention.banned_communities.clear();
  for (std::size_t g = 0; g < config.n_banned_groups; ++g) data.intervention.banned_communities.insert(banned_group_name(g));
  data.config.intervention = data.intervention;
  config.validate();
  const auto& spec = data.intervention;
  const std::size_t n = config.n_users;

  auto memberships = assign_memberships(config);
  std::vector<UserPlan> plans(n);
  std::vector<double> noise(n);
  data.users.resize(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, kLatentStream, i));
    auto& p = plans[i];
    p.index = i;
    for (auto& z : p.latent) z = rng.normal();
    p.banned_trend = kBannedTrendSpread * rng.normal();
    p.external_scale = std::exp(kExternalRateSpread * rng.normal());
    p.influence = kInfluenceSpread * rng.normal();
    p.pace = std::exp(-kPaceScale * p.latent[static_cast<int>(SignalConcept::CommentGap)]);
    p.external_slope = kTrendPerMonth * p.latent[static_cast<int>(SignalConcept::ExternalTrend)];
    p.identity_rate =
        logistic_fn(kIdentityIntercept + kIdentityScale * p.latent[static_cast<int>(SignalConcept::IdentityAttack)]);
    const double part = p.latent[static_cast<int>(SignalConcept::ParticipationRatio)];
    const auto n_ext = static_cast<std::size_t>(std::clamp(
        std::lround(kExternalCommunities * std::exp(kParticipationScale * part)), 1L,
        static_cast<long>(config.n_nonbanned_groups)));
    p.external_communities = rng.sample_without_replacement(config.n_nonbanned_groups, n_ext);
    noise[i] = rng.logistic();
    auto& u = data.users[i];
    u.user_id = synth_user_name(i);
    u.groups = memberships[i];
    u.latent = p.latent;
  });

  std::vector<std::vector<PendingEvent>> per_user(n);
  std::vector<Realized> realized(n);
  parallel_for(n, config.threads,
               [&](std::size_t i) { per_user[i] = pre_events(config, spec, plans[i], data.users[i], realized[i]); });

  // The abandonment logit weighs the standardized pre-period behaviour, so
  // the planted signal is what the features measure.
  std::array<double, 4> mean{}, sd{};
  for (int k = 0; k < 4; ++k) {
    for (const auto& r : realized) mean[k] += r[k] / static_cast<double>(n);
    for (const auto& r : realized) sd[k] += (r[k] - mean[k]) * (r[k] - mean[k]) / static_cast<double>(n);
    sd[k] = std::sqrt(sd[k]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double logit = 0;
    for (const auto& [signal, effect] : config.effects) {
      const int k = static_cast<int>(signal);
      if (sd[k] > 0) logit += effect * (realized[i][k] - mean[k]) / sd[k];
    }
    data.users[i].score = logit + config.label_noise * noise[i];
  }

  // The highest scores abandon; soft positives extend the hard ones.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return data.users[a].score > data.users[b].score; });
  const auto hard = static_cast<std::size_t>(std::llround(config.hard_prior * static_cast<double>(n)));
  const auto soft = static_cast<std::size_t>(std::llround(config.soft_prior * static_cast<double>(n)));
  for (std::size_t r = 0; r < n; ++r) {
    data.users[order[r]].hard = r < hard ? 1 : 0;
    data.users[order[r]].soft = r < soft ? 1 : 0;
  }

  parallel_for(n, config.threads, [&](std::size_t i) {
    auto post = post_events(config, spec, plans[i], data.users[i], per_user[i].size());
    for (auto& e : post) per_user[i].push_back(std::move(e));
  });

  std::vector<PendingEvent> all;
  for (auto& v : per_user) {
    for (auto& e : v) all.push_back(std::move(e));
    std::vector<PendingEvent>().swap(v);
  }
  std::sort(all.begin(), all.end(), [](const PendingEvent& a, const PendingEvent& b) {
    if (a.event.timestamp != b.event.timestamp) return a.event.timestamp < b.event.timestamp;
    if (a.event.user_id != b.event.user_id) return a.event.user_id < b.event.user_id;
    return a.event.event_id < b.event.event_id;
  });

  // Replies point at one of the last kReplyWindow comments of the same
  // community, written by another user.
  Rng reply_rng(derive_seed(config.seed, kReplyStream));
  std::unordered_map<std::string, std::vector<std::size_t>> seen;
  data.events.reserve(all.size());
  for (auto& p : all) {
    auto& earlier = seen[p.event.community_id];
    if (p.reply) {
      const std::size_t from = earlier.size() > kReplyWindow ? earlier.size() - kReplyWindow : 0;
      for (int attempt = 0; attempt < 4 && !earlier.empty(); ++attempt) {
        const auto& parent = data.events[earlier[from + reply_rng.index(earlier.size() - from)]];
        if (parent.user_id == p.event.user_id) continue;
        p.event.parent_id = "t1_" + parent.event_id;
        p.event.is_thread_root = false;
        break;
      }
      if (!p.event.parent_id) p.event.parent_id = "t3_" + base36(reply_rng.next() % 2176782336ULL);
    }
    earlier.push_back(data.events.size());
    data.events.push_back(std::move(p.event));
  }
  return data;
}

namespace {

class DumpSink {
 public:
  explicit DumpSink(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    if (path.extension() == ".gz") {
      gz_ = gzopen(path.c_str(), "wb6");
      if (!gz_) throw IoError("cannot open " + path.string() + " for writing");
    } else {
      out_.open(path, std::ios::binary);
      if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    }
    buffer_.reserve(kFlushBytes + 4096);
  }
  ~DumpSink() {
    if (gz_) gzclose(gz_);
  }
  DumpSink(const DumpSink&) = delete;
  DumpSink& operator=(const DumpSink&) = delete;

  void line(const std::string& s) {
    buffer_ += s;
    buffer_ += '\n';
    if (buffer_.size() >= kFlushBytes) flush();
  }
  void close() {
    flush();
    if (gz_) {
      if (gzclose(gz_) != Z_OK) throw IoError("failed to finish " + path_.string());
      gz_ = nullptr;
    } else {
      out_.close();
      if (!out_) throw IoError("failed to write " + path_.string());
    }
  }

 private:
  static constexpr std::size_t kFlushBytes = 1 << 20;
  void flush() {
    if (buffer_.empty()) return;
    if (gz_) {
      if (gzwrite(gz_, buffer_.data(), static_cast<unsigned>(buffer_.size())) <= 0)
        throw IoError("failed to write " + path_.string());
    } else {
      out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    }
    buffer_.clear();
  }
  std::filesystem::path path_;
  gzFile gz_ = nullptr;
  std::ofstream out_;
  std::string buffer_;
};

}  // namespace

void write_dump(const std::filesystem::path& path, const std::vector<CommentEvent>& events) {
  DumpSink sink(path);
  for (const auto& e : events) sink.line(to_dump_line(e));
  sink.close();
}

void write_groups_csv(const std::filesystem::path& path, const SynthData& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "user_id,groups\n";
  for (const auto& u : data.users) {
    out << u.user_id << ',';
    for (std::size_t k = 0; k < u.groups.size(); ++k) out << (k ? ";" : "") << banned_group_name(u.groups[k]);
    out << '\n';
  }
  if (!out) throw IoError("failed to write " + path.string());
}

void write_scale_dump(const std::filesystem::path& path, std::size_t n_lines, std::uint64_t seed,
                      const InterventionSpec& intervention, std::size_t n_users) {
  if (n_users == 0) throw UsageError("scale dumps need at least one user");
  std::vector<std::string> banned(intervention.banned_communities.begin(), intervention.banned_communities.end());
  if (banned.empty())
    for (std::size_t g = 0; g < 15; ++g) banned.push_back(banned_group_name(g));
  Rng rng(seed);
  DumpSink sink(path);
  CommentEvent e;
  for (std::size_t i = 0; i < n_lines; ++i) {
    e.event_id = "s" + base36(i);
    e.user_id = synth_user_name(rng.index(n_users));
    e.community_id = rng.bernoulli(0.4) ? banned[rng.index(banned.size())] : external_community_name(rng.index(200));
    do {
      e.timestamp = rng.integer(intervention.pre_start(), intervention.post_end());
    } while (e.timestamp == intervention.t0);
    bool planted = false;
    e.body = make_body(rng, 0.05, planted);
    e.vote_score = rng.integer(-5, 50);
    e.parent_id = rng.bernoulli(0.4) && i > 0 ? "t1_s" + base36(rng.index(i)) : "t3_" + base36(rng.next() % 46656);
    e.is_stickied = false;
    sink.line(to_dump_line(e));
  }
  sink.close();
}

}  // namespace abandon
