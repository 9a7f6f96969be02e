#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "abandon/cohort/intervention.hpp"
#include "abandon/ingest/event.hpp"

namespace abandon {

struct PartitionReport {
  std::size_t input = 0;
  std::size_t routed[3] = {0, 0, 0};
  std::size_t discarded_at_t0 = 0;
  std::size_t discarded_banned_after = 0;
  std::size_t discarded_out_of_frame = 0;

  std::size_t discarded() const { return discarded_at_t0 + discarded_banned_after + discarded_out_of_frame; }
  nlohmann::json to_json() const;
};

// Routes single events; usable on a stream without holding the whole dump.
class Partitioner {
 public:
  explicit Partitioner(const InterventionSpec& spec);

  // The split an event belongs to, or nothing when it is discarded. Every
  // call is recorded in the report.
  std::optional<SplitTag> route(const CommentEvent& e);
  const PartitionReport& report() const { return report_; }
  // Emits a warning for discarded banned-community events, if any.
  void warn_if_needed() const;

 private:
  const InterventionSpec& spec_;
  PartitionReport report_;
};

struct PartitionResult {
  SplitSet splits;
  PartitionReport report;
};

// Events keep their input order within each split.
PartitionResult partition_events(std::vector<CommentEvent> events, const InterventionSpec& spec);

}  // namespace abandon
