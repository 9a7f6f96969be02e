#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "abandon/cohort/cohort.hpp"
#include "abandon/cohort/intervention.hpp"
#include "abandon/evaluate/groups.hpp"
#include "abandon/evaluate/pipeline.hpp"
#include "abandon/features/profile.hpp"
#include "abandon/importance/importance.hpp"
#include "abandon/ingest/parse.hpp"
#include "abandon/synth/synth.hpp"

namespace abandon::cli {

// Everything one run of the command line tool needs. Loaded from an optional
// JSON file, then patched by `--set section.key=value` overrides.
//
//   {
//     "paths": {"work_dir", "dump", "registry", "toxicity_scores", "lexicon_dir"},
//     "task": "hard" | "soft",
//     "intervention": {...}, "fields": {...},
//     "cohort": {"remove_bots", "bot_gap_seconds", "require_consistency",
//                "drop_externally_inactive"},
//     "features": {"strip_markdown", "skip_placeholder_bodies", "impute"},
//     "groups": {"min_comments"},
//     "loocv": {"models"}, "bins": {"models"}, "ablation": {"model"},
//     "pipeline": {...}, "importance": {...}, "synth": {...}
//   }
struct RunConfig {
  std::filesystem::path work_dir = "abandon-run";
  std::filesystem::path dump;             // empty: the synth stage's dump
  std::filesystem::path registry;         // empty: the built-in registry
  std::filesystem::path toxicity_scores;  // CSV of precomputed scores
  std::filesystem::path lexicon_dir;      // replaces the built-in toxicity lexicons

  Task task = Task::Hard;
  InterventionSpec intervention;
  FieldMapping fields;
  CohortOptions cohort;
  TextOptions text;
  bool impute = true;
  std::size_t group_min_comments = kParticipationThreshold;

  std::vector<ModelKind> loocv_models = {ModelKind::GB};
  std::vector<ModelKind> bins_models;  // empty: the pipeline's models
  ModelKind ablation_model = ModelKind::SVM;

  PipelineConfig pipeline;
  ImportanceConfig importance;
  SynthConfig synth;

  nlohmann::json to_json() const;
  // Unknown keys are rejected; referenced input paths must exist.
  static RunConfig from_json(const nlohmann::json& j);
};

// Defaults, merged with the file (if any), then with each override in turn.
// Override values are parsed as JSON when possible and taken as strings
// otherwise. Throws UsageError on any problem.
RunConfig load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides);

// Sets one dotted path in a JSON object, creating objects on the way.
void apply_override(nlohmann::json& config, const std::string& assignment);

}  // namespace abandon::cli
