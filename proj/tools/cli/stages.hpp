#pragma once

#include <filesystem>
#include <string>

#include "run_config.hpp"
#include "workspace.hpp"

namespace abandon::cli {

struct Context {
  RunConfig config;
  Workspace workspace;
  int threads = 1;
};

struct IngestArgs {
  std::filesystem::path input;  // overrides paths.dump
  std::filesystem::path spec;   // intervention settings file; overrides the config's
  std::filesystem::path out;    // cache directory; default <work_dir>/ingest/cache
};

// Stage directory names for the task-specific stages, e.g. "train-hard".
std::string task_stage(const std::string& stage, Task task);

void stage_synth(const Context& ctx);
void stage_ingest(const Context& ctx, const IngestArgs& args);
void stage_cohort(const Context& ctx);
void stage_features(const Context& ctx);
void stage_train(const Context& ctx);
void stage_evaluate(const Context& ctx, bool ablation);
void stage_loocv(const Context& ctx);
void stage_bins(const Context& ctx);
void stage_importance(const Context& ctx);
void stage_report(const Context& ctx);

}  // namespace abandon::cli
