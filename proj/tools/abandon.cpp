// Command line entry point: one subcommand per pipeline stage, all sharing
// one run config and one work directory.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"
#include "cli/run_config.hpp"
#include "cli/stages.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

void report_failure(bool log_json, const char* kind, const std::exception& e) {
  if (log_json) abandon::log::error(e.what(), {{"kind", kind}});
  else std::cerr << kind << " error: " << e.what() << '\n';
}

int default_threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

}  // namespace

int main(int argc, char** argv) {
  using namespace abandon;

  CLI::App app{"Predicts which users abandon a platform after their communities are banned."};
  app.require_subcommand(1);
  // Global options are accepted after the subcommand name too.
  app.fallthrough();

  std::string config_file;
  std::vector<std::string> overrides;
  int threads = default_threads();
  bool force = false, log_json = false, quiet = false;
  app.add_option("-c,--config", config_file, "JSON run config");
  app.add_option("--set", overrides, "Override one setting, e.g. --set pipeline.seed=7 (repeatable)");
  app.add_option("--threads", threads, "Worker threads (default: available cores)")->check(CLI::PositiveNumber);
  app.add_flag("--force", force, "Run even when an upstream artifact is out of date");
  app.add_flag("--log-json", log_json, "Write logs as JSON lines");
  app.add_flag("-q,--quiet", quiet, "Suppress logging");

  std::string work_dir, task;
  app.add_option("-w,--work-dir", work_dir, "Run directory (overrides paths.work_dir)");
  app.add_option("-t,--task", task, "hard or soft (overrides task)");

  cli::IngestArgs ingest_args;
  bool ablation = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort and its comment dump");
  auto* ingest = app.add_subcommand("ingest", "Parse a dump into the partitioned event cache");
  ingest->add_option("--input", ingest_args.input, "Comment dump (.ndjson or .ndjson.gz)");
  ingest->add_option("--spec", ingest_args.spec, "Intervention settings as JSON");
  ingest->add_option("--out", ingest_args.out, "Cache directory");
  auto* cohort = app.add_subcommand("cohort", "Filter users and label abandonment");
  auto* features = app.add_subcommand("features", "Build the user feature matrix");
  auto* train = app.add_subcommand("train", "Select features, tune and fit every model");
  auto* evaluate = app.add_subcommand("evaluate", "Score trained models and baselines on the held-out users");
  evaluate->add_flag("--ablation", ablation, "Also compare the imbalance strategies");
  auto* loocv = app.add_subcommand("loocv", "Leave one banned community out");
  auto* bins = app.add_subcommand("bins", "Run the pipeline per activity stratum");
  auto* importance = app.add_subcommand("importance", "Fused feature and feature-class importance");
  auto* report = app.add_subcommand("report", "Collate stage outputs into result tables");
  auto* show_config = app.add_subcommand("config", "Print the effective run config, defaults included");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  log::set_json(log_json);
  log::set_quiet(quiet);
  try {
    if (!work_dir.empty()) overrides.push_back("paths.work_dir=" + nlohmann::json(work_dir).dump());
    if (!task.empty()) overrides.push_back("task=" + nlohmann::json(task).dump());
    auto config = cli::load_run_config(config_file, overrides);
    if (show_config->parsed()) {
      std::cout << config.to_json().dump(2) << '\n';
      return kOk;
    }
    config.pipeline.threads = threads;
    config.synth.threads = threads;
    const cli::Context ctx{config, cli::Workspace(config.work_dir, force), threads};

    if (synth->parsed()) cli::stage_synth(ctx);
    else if (ingest->parsed()) cli::stage_ingest(ctx, ingest_args);
    else if (cohort->parsed()) cli::stage_cohort(ctx);
    else if (features->parsed()) cli::stage_features(ctx);
    else if (train->parsed()) cli::stage_train(ctx);
    else if (evaluate->parsed()) cli::stage_evaluate(ctx, ablation);
    else if (loocv->parsed()) cli::stage_loocv(ctx);
    else if (bins->parsed()) cli::stage_bins(ctx);
    else if (importance->parsed()) cli::stage_importance(ctx);
    else if (report->parsed()) cli::stage_report(ctx);
    return kOk;
  } catch (const UsageError& e) {
    report_failure(log_json, "usage", e);
    return kUsage;
  } catch (const DataError& e) {
    report_failure(log_json, "data", e);
    return kData;
  } catch (const std::exception& e) {
    report_failure(log_json, "internal", e);
    return kInternal;
  }
}
