#include "stages.hpp"

#include <fstream>
#include <sstream>

#include "abandon/cohort/cohort.hpp"
#include "abandon/common/error.hpp"
#include "abandon/common/log.hpp"
#include "abandon/evaluate/report.hpp"
#include "abandon/features/builder.hpp"
#include "abandon/features/registry.hpp"
#include "abandon/importance/importance.hpp"
#include "abandon/ingest/cache.hpp"
#include "abandon/ingest/parse.hpp"
#include "abandon/ingest/partition.hpp"
#include "abandon/synth/synth.hpp"
#include "abandon/text/sentiment.hpp"
#include "abandon/text/toxicity.hpp"

namespace abandon::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kModelPrefix = "model:";

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + " is not valid JSON");
  return j;
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

InterventionSpec read_spec(const fs::path& path) {
  try {
    return InterventionSpec::from_json(read_json(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

PipelineConfig pipeline_for(const Context& ctx) {
  auto p = ctx.config.pipeline;
  p.threads = ctx.threads;
  return p;
}

// Feature matrix and labels of the configured task, rows aligned.
struct Dataset {
  FeatureMatrix fm;
  Labels y;
};

Dataset load_dataset(const Context& ctx, StageRun& run) {
  Dataset d;
  d.fm = FeatureMatrix::load(run.use("features", "matrix"));
  const std::string labels_name = "labels_" + std::string(task_name(ctx.config.task));
  auto table = read_labels_csv(run.use("cohort", labels_name));
  if (table.users != d.fm.user_ids)
    throw StaleArtifactError("the feature matrix and " + labels_name +
                             " list different users (rerun the features stage)");
  d.y.assign(table.labels.begin(), table.labels.end());
  return d;
}

json run_config_section(const Context& ctx, std::initializer_list<const char*> keys) {
  const auto all = ctx.config.to_json();
  json out = json::object();
  for (const char* k : keys) out[k] = all.at(k);
  return out;
}

}  // namespace

std::string task_stage(const std::string& stage, Task task) { return stage + "-" + std::string(task_name(task)); }

void stage_synth(const Context& ctx) {
  StageRun run(ctx.workspace, "synth", run_config_section(ctx, {"intervention", "synth"}), ctx.threads);
  SynthConfig sc = ctx.config.synth;
  sc.threads = ctx.threads;
  const auto data = generate(sc);
  const auto dir = run.dir();

  write_dump(dir / "dump.ndjson.gz", data.events);
  write_groups_csv(dir / "groups.csv", data);
  write_file(dir / "truth.csv", [&](std::ostream& out) {
    out << "user_id,hard,soft\n";
    for (const auto& u : data.users) out << u.user_id << ',' << u.hard << ',' << u.soft << '\n';
  });
  write_json(dir / "intervention.json", data.intervention.to_json());
  OverlapMatrix overlap;
  for (std::size_t g = 0; g < sc.n_banned_groups; ++g) overlap.groups.push_back(banned_group_name(g));
  overlap.percent = data.overlap();
  write_file(dir / "overlap.csv", [&](std::ostream& out) { write_overlap_csv(out, overlap); });

  run.produce("dump", dir / "dump.ndjson.gz");
  run.produce("groups", dir / "groups.csv");
  run.produce("truth", dir / "truth.csv");
  run.produce("intervention", dir / "intervention.json");
  run.produce("overlap", dir / "overlap.csv");
  run.seed("synth", sc.seed);
  run.note("users", data.users.size());
  run.note("events", data.events.size());
  run.finish();
}

void stage_ingest(const Context& ctx, const IngestArgs& args) {
  const auto& cfg = ctx.config;
  StageRun run(ctx.workspace, "ingest", run_config_section(ctx, {"intervention", "fields"}), ctx.threads);

  fs::path dump;
  bool from_synth = false;
  if (!args.input.empty() || !cfg.dump.empty()) {
    dump = args.input.empty() ? cfg.dump : args.input;
    run.use_external("dump", dump);
  } else {
    dump = run.use("synth", "dump");
    from_synth = true;
  }

  InterventionSpec spec = cfg.intervention;
  if (!args.spec.empty()) {
    run.use_external("spec", args.spec);
    spec = read_spec(args.spec);
  }
  if (spec.banned_communities.empty() && from_synth)
    spec.banned_communities = read_spec(run.use("synth", "intervention")).banned_communities;
  if (spec.banned_communities.empty())
    throw UsageError("no banned communities configured (set intervention.banned_communities)");

  const fs::path cache = args.out.empty() ? run.dir() / "cache" : args.out;
  if (fs::exists(cache)) {
    if (!fs::is_directory(cache) || (!fs::is_empty(cache) && !fs::exists(cache / "manifest.json")))
      throw UsageError("refusing to overwrite " + cache.string() + ": it is not an event cache");
    fs::remove_all(cache);
  }

  auto reader = LineReader::open(dump);
  Partitioner partitioner(spec);
  CacheWriter writer(cache);
  DumpParser parser(cfg.fields, ctx.threads);
  const auto report = parser.run(*reader, [&](CommentEvent&& e) {
    if (auto tag = partitioner.route(e)) writer.add(*tag, e);
  });
  partitioner.warn_if_needed();
  writer.finish({{"parse", report.to_json()}, {"partition", partitioner.report().to_json()}});

  write_json(run.dir() / "intervention.json", spec.to_json());
  write_json(run.dir() / "report.json", {{"parse", report.to_json()}, {"partition", partitioner.report().to_json()}});
  run.produce("cache", cache);
  run.produce("intervention", run.dir() / "intervention.json");
  run.produce("report", run.dir() / "report.json");
  run.note("lines", report.lines);
  run.note("parsed", report.parsed);
  run.note("skipped", report.skipped);
  run.note("discarded", partitioner.report().discarded());
  run.finish();
}

void stage_cohort(const Context& ctx) {
  StageRun run(ctx.workspace, "cohort", run_config_section(ctx, {"cohort"}), ctx.threads);
  const auto spec = read_spec(run.use("ingest", "intervention"));
  const auto splits = read_cache(run.use("ingest", "cache"));
  const auto cohort = build_cohort(splits, spec, ctx.config.cohort);
  const auto dir = run.dir();

  write_labels_csv(dir / "labels_hard.csv", cohort.users, cohort.hard_labels);
  write_labels_csv(dir / "labels_soft.csv", cohort.users, cohort.soft_labels);
  write_file(dir / "activity.csv", [&](std::ostream& out) {
    out << "user_id,pre_count,post_count,soft_window_count\n";
    for (const auto& s : cohort.summaries)
      out << s.user_id << ',' << s.pre_count << ',' << s.post_count << ',' << s.soft_window_count << '\n';
  });
  write_json(dir / "report.json", cohort.report.to_json());

  run.produce("labels_hard", dir / "labels_hard.csv");
  run.produce("labels_soft", dir / "labels_soft.csv");
  run.produce("activity", dir / "activity.csv");
  run.produce("report", dir / "report.json");
  run.note("users", cohort.users.size());
  run.note("hard_positives", cohort.report.hard_positives);
  run.note("soft_positives", cohort.report.soft_positives);
  run.finish();
}

void stage_features(const Context& ctx) {
  const auto& cfg = ctx.config;
  StageRun run(ctx.workspace, "features", run_config_section(ctx, {"features", "paths"}), ctx.threads);
  const auto spec = read_spec(run.use("ingest", "intervention"));
  const auto splits = read_cache(run.use("ingest", "cache"));
  const auto users = read_labels_csv(run.use("cohort", "labels_hard")).users;

  FeatureRegistry custom;
  const FeatureRegistry* registry = &FeatureRegistry::builtin();
  if (!cfg.registry.empty()) {
    run.use_external("registry", cfg.registry);
    custom = FeatureRegistry::load(cfg.registry);
    registry = &custom;
  }

  text::SentimentAnalyzer sentiment;
  std::unique_ptr<text::ToxicityScorer> toxicity;
  if (!cfg.toxicity_scores.empty()) {
    run.use_external("toxicity_scores", cfg.toxicity_scores);
    toxicity = std::make_unique<text::ImportedToxicityScorer>(
        text::ImportedToxicityScorer::from_csv(cfg.toxicity_scores));
  } else if (!cfg.lexicon_dir.empty()) {
    run.use_external("lexicons", cfg.lexicon_dir);
    toxicity = std::make_unique<text::LexiconToxicityScorer>(
        text::LexiconToxicityScorer::from_directory(cfg.lexicon_dir));
  } else {
    toxicity = std::make_unique<text::LexiconToxicityScorer>();
  }

  BuildOptions options{cfg.text, ctx.threads, cfg.impute};
  auto built = build_matrix(users, *registry, splits, spec, {&sentiment, toxicity.get()}, options);
  const auto dir = run.dir();
  built.matrix.save(dir / "matrix.bin");
  built.matrix.write_csv(dir / "matrix.csv");
  write_json(dir / "imputation.json", built.imputation.to_json());

  run.produce("matrix", dir / "matrix.bin");
  run.produce("matrix_csv", dir / "matrix.csv");
  run.produce("imputation", dir / "imputation.json");
  run.note("users", built.matrix.users());
  run.note("features", built.matrix.features());
  run.note("registry_version", built.matrix.registry_version);
  run.note("toxicity_scorer", toxicity->name());
  run.finish();
}

void stage_train(const Context& ctx) {
  const auto config = pipeline_for(ctx);
  StageRun run(ctx.workspace, task_stage("train", ctx.config.task), run_config_section(ctx, {"task", "pipeline"}),
               ctx.threads);
  const auto data = load_dataset(ctx, run);
  const auto& X = data.fm.values;

  ExperimentResult r;
  r.split = prepare_split(X, data.y, config);
  const Matrix X_train = X.select_rows(r.split.train);
  Labels y_train;
  for (auto i : r.split.train) y_train.push_back(data.y[i]);

  const auto dir = run.dir();
  json training = json::array();
  for (auto kind : config.models) {
    const std::string name(model_kind_name(kind));
    log::info("training model", {{"model", name}});
    ModelResult m;
    m.outcome = train_with_protocol(kind, X_train, y_train, data.fm.names, config, config.seed);
    const auto path = dir / (name + ".model");
    m.outcome.model.save(path);
    run.produce(std::string(kModelPrefix) + name, path);
    training.push_back(m.outcome.to_json());
    r.models.push_back(std::move(m));
  }
  write_json(dir / "split.json", r.split.to_json());
  write_json(dir / "training.json", training);
  write_json(dir / "protocol.json", protocol_manifest(r, config, data.y, X.cols()));

  run.produce("split", dir / "split.json");
  run.produce("training", dir / "training.json");
  run.produce("protocol", dir / "protocol.json");
  run.seed("pipeline", config.seed);
  run.note("train_rows", r.split.train.size());
  run.note("test_rows", r.split.test.size());
  run.note("outliers", r.split.outliers.size());
  run.finish();
}

void stage_evaluate(const Context& ctx, bool ablation) {
  const auto config = pipeline_for(ctx);
  const auto train_stage = task_stage("train", ctx.config.task);
  StageRun run(ctx.workspace, task_stage("evaluate", ctx.config.task),
               run_config_section(ctx, {"task", "pipeline", "ablation"}), ctx.threads);

  std::vector<std::string> model_names;
  for (const auto& outcome : read_json(run.use(train_stage, "training"))) {
    model_names.push_back(outcome.at("model").get<std::string>());
  }
  if (model_names.empty())
    throw DataError("missing artifact: stage '" + train_stage + "' saved no trained model (run train first)");

  const auto data = load_dataset(ctx, run);
  const auto& X = data.fm.values;
  ExperimentResult r;
  r.split = PreparedSplit::from_json(read_json(run.use(train_stage, "split")));
  for (auto i : r.split.train)
    if (i >= data.y.size()) throw DataError("the saved split does not fit the feature matrix");
  for (auto i : r.split.test)
    if (i >= data.y.size()) throw DataError("the saved split does not fit the feature matrix");

  const Matrix X_train = X.select_rows(r.split.train), X_test = X.select_rows(r.split.test);
  Labels y_train, y_test;
  for (auto i : r.split.train) y_train.push_back(data.y[i]);
  for (auto i : r.split.test) y_test.push_back(data.y[i]);

  const auto dir = run.dir();
  json f1s = json::object();
  for (const auto& name : model_names) {
    const auto kind = parse_model_kind(name);
    auto model = TrainedModel::load(run.use(train_stage, std::string(kModelPrefix) + name));
    ModelResult m;
    m.outcome = restore_outcome(kind, std::move(model), config);
    m.report = evaluate_trained(m.outcome.model, m.outcome.chosen_scores(), X_test, y_test);
    write_file(dir / ("pr_" + name + ".csv"), [&](std::ostream& out) { write_pr_curve_csv(out, m.report); });
    run.produce("pr:" + name, dir / ("pr_" + name + ".csv"));
    f1s[name] = m.report.test.f1;
    r.models.push_back(std::move(m));
  }
  for (auto b : kAllBaselines) r.baselines.push_back(run_baseline(b, X_train, y_train, X_test, y_test, data.fm.names, config));
  r.protocol = protocol_manifest(r, config, data.y, X.cols());

  write_file(dir / "results.csv", [&](std::ostream& out) { write_results_table(out, r); });
  write_json(dir / "results.json", r.to_json());
  run.produce("results", dir / "results.csv");
  run.produce("results_json", dir / "results.json");

  if (ablation) {
    auto rows = run_imbalance_ablation(X, data.y, data.fm.names, config, ctx.config.ablation_model);
    write_file(dir / "ablation.csv", [&](std::ostream& out) { write_ablation_table(out, rows); });
    run.produce("ablation", dir / "ablation.csv");
  }
  run.seed("pipeline", config.seed);
  run.note("positive_f1", f1s);
  run.finish();
}

void stage_loocv(const Context& ctx) {
  auto config = pipeline_for(ctx);
  config.models = ctx.config.loocv_models;
  StageRun run(ctx.workspace, task_stage("loocv", ctx.config.task),
               run_config_section(ctx, {"task", "pipeline", "loocv", "groups"}), ctx.threads);
  const auto data = load_dataset(ctx, run);
  const auto splits = read_cache(run.use("ingest", "cache"));
  const auto groups = assign_groups(splits, data.fm.user_ids, ctx.config.group_min_comments);
  if (groups.groups.size() < 2) throw DataError("leave-one-group-out needs at least two banned communities");
  const auto result = run_loocv(data.fm.values, data.y, groups, data.fm.names, config);

  const auto dir = run.dir();
  write_file(dir / "loocv.csv", [&](std::ostream& out) { write_loocv_table(out, result); });
  write_file(dir / "overlap.csv", [&](std::ostream& out) { write_overlap_csv(out, result.overlap); });
  write_json(dir / "loocv.json", result.to_json());
  run.produce("loocv", dir / "loocv.csv");
  run.produce("overlap", dir / "overlap.csv");
  run.produce("loocv_json", dir / "loocv.json");
  run.seed("pipeline", config.seed);
  run.note("groups", groups.groups.size());
  run.finish();
}

void stage_bins(const Context& ctx) {
  auto config = pipeline_for(ctx);
  if (!ctx.config.bins_models.empty()) config.models = ctx.config.bins_models;
  StageRun run(ctx.workspace, task_stage("bins", ctx.config.task),
               run_config_section(ctx, {"task", "pipeline", "bins"}), ctx.threads);
  const auto data = load_dataset(ctx, run);

  std::map<std::string, double> activity;
  {
    std::ifstream in(run.use("cohort", "activity"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::stringstream row(line);
      std::string user, pre;
      std::getline(row, user, ',');
      std::getline(row, pre, ',');
      activity[user] = std::stod(pre);
    }
  }
  std::vector<double> counts;
  for (const auto& u : data.fm.user_ids) {
    auto it = activity.find(u);
    if (it == activity.end()) throw StaleArtifactError("no activity count for user " + u + " (rerun the cohort stage)");
    counts.push_back(it->second);
  }
  const auto study = run_activity_bins(data.fm.values, data.y, counts, data.fm.names, config);

  const auto dir = run.dir();
  write_file(dir / "activity.csv", [&](std::ostream& out) { write_activity_table(out, study); });
  write_json(dir / "bins.json", study.to_json());
  run.produce("activity", dir / "activity.csv");
  run.produce("bins_json", dir / "bins.json");
  run.seed("pipeline", config.seed);
  run.finish();
}

void stage_importance(const Context& ctx) {
  const auto config = pipeline_for(ctx);
  StageRun run(ctx.workspace, task_stage("importance", ctx.config.task),
               run_config_section(ctx, {"task", "pipeline", "importance"}), ctx.threads);
  const auto data = load_dataset(ctx, run);
  std::vector<std::string> classes;
  for (auto c : data.fm.classes) classes.emplace_back(feature_class_name(c));
  const auto result = run_importance(data.fm.values, data.y, data.fm.names, classes, config, ctx.config.importance);

  const auto dir = run.dir();
  write_file(dir / "importance.csv", [&](std::ostream& out) { result.report.write_csv(out); });
  write_file(dir / "classes.csv", [&](std::ostream& out) { result.report.write_class_csv(out); });
  write_json(dir / "importance.json", result.to_json(data.fm.names));
  run.produce("importance", dir / "importance.csv");
  run.produce("classes", dir / "classes.csv");
  run.produce("importance_json", dir / "importance.json");
  run.seed("pipeline", config.seed);
  run.note("survivors", result.pruned_names.size());
  const auto ranking = result.report.ranking();
  if (!ranking.empty()) run.note("top_feature", ranking.front());
  run.finish();
}

void stage_report(const Context& ctx) {
  StageRun run(ctx.workspace, "report", json::object(), ctx.threads);
  const auto& ws = ctx.workspace;
  // (source stage, artifact, collated file name)
  const std::vector<std::tuple<std::string, std::string, std::string>> sources = {
      {"evaluate", "results", "table2_classification.csv"},
      {"bins", "activity", "table3_activity.csv"},
      {"loocv", "loocv", "table5_loocv.csv"},
      {"loocv", "overlap", "loocv_overlap.csv"},
      {"evaluate", "ablation", "table6_imbalance.csv"},
      {"importance", "importance", "importance.csv"},
      {"importance", "classes", "importance_classes.csv"},
  };
  json manifests = json::object();
  std::size_t collated = 0;
  for (auto task : {Task::Hard, Task::Soft}) {
    for (const auto& [stage, artifact, target] : sources) {
      const auto name = task_stage(stage, task);
      if (!ws.has_manifest(name) || !ws.manifest(name)["outputs"].contains(artifact)) continue;
      const auto src = run.use(name, artifact);
      const auto dst = run.dir() / std::string(task_name(task)) / target;
      fs::create_directories(dst.parent_path());
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
      run.produce(std::string(task_name(task)) + "/" + target, dst);
      ++collated;
    }
  }
  if (collated == 0)
    throw DataError("missing artifact: nothing to report (run evaluate, bins, loocv or importance first)");
  for (const auto& entry : fs::directory_iterator(ws.root())) {
    const auto stage = entry.path().filename().string();
    if (stage != "report" && entry.is_directory() && ws.has_manifest(stage)) manifests[stage] = ws.manifest(stage);
  }
  write_json(run.dir() / "manifests.json", manifests);
  run.produce("manifests", run.dir() / "manifests.json");
  run.note("tables", collated);
  run.finish();
}

}  // namespace abandon::cli
