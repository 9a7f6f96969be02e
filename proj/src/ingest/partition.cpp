#include "abandon/ingest/partition.hpp"

#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"

namespace abandon {

nlohmann::json PartitionReport::to_json() const {
  return nlohmann::json{{"input", input},
                        {"BannedBefore", routed[0]},
                        {"NonBannedBefore", routed[1]},
                        {"NonBannedAfter", routed[2]},
                        {"discarded_at_t0", discarded_at_t0},
                        {"discarded_banned_after", discarded_banned_after},
                        {"discarded_out_of_frame", discarded_out_of_frame}};
}

Partitioner::Partitioner(const InterventionSpec& spec) : spec_(spec) {
  if (spec.banned_communities.empty()) throw UsageError("intervention spec lists no banned communities");
}

std::optional<SplitTag> Partitioner::route(const CommentEvent& e) {
  ++report_.input;
  double t = e.time();
  if (e.timestamp == spec_.t0 && e.subsecond == 0.0) {
    ++report_.discarded_at_t0;
    return std::nullopt;
  }
  bool banned = spec_.is_banned(e.community_id);
  std::optional<SplitTag> tag;
  if (spec_.in_pre(t)) {
    tag = banned ? SplitTag::BannedBefore : SplitTag::NonBannedBefore;
  } else if (spec_.in_post(t)) {
    if (banned) {
      ++report_.discarded_banned_after;
      return std::nullopt;
    }
    tag = SplitTag::NonBannedAfter;
  } else {
    ++report_.discarded_out_of_frame;
    return std::nullopt;
  }
  ++report_.routed[static_cast<int>(*tag)];
  return tag;
}

void Partitioner::warn_if_needed() const {
  if (report_.discarded_banned_after > 0) {
    log::warn("discarded banned-community events after the intervention",
              {{"count", std::to_string(report_.discarded_banned_after)}});
  }
}

PartitionResult partition_events(std::vector<CommentEvent> events, const InterventionSpec& spec) {
  PartitionResult out;
  Partitioner p(spec);
  for (auto& e : events) {
    if (auto tag = p.route(e)) out.splits[*tag].events.push_back(std::move(e));
  }
  p.warn_if_needed();
  out.report = p.report();
  return out;
}

}  // namespace abandon
