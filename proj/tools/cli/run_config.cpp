#include "run_config.hpp"

#include <fstream>
#include <set>

#include "abandon/common/error.hpp"

namespace abandon::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, const std::string& section, const std::set<std::string>& known) {
  if (!j.is_object()) throw UsageError("'" + section + "' must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw UsageError("unknown setting '" + section + "." + key + "'");
}

json model_list(const std::vector<ModelKind>& models) {
  json out = json::array();
  for (auto m : models) out.push_back(std::string(model_kind_name(m)));
  return out;
}

std::vector<ModelKind> parse_models(const json& j) {
  std::vector<ModelKind> out;
  for (const auto& m : j) out.push_back(parse_model_kind(m.get<std::string>()));
  return out;
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!p.empty() && !fs::exists(p)) throw UsageError(what + " '" + p.string() + "' does not exist");
}

}  // namespace

json RunConfig::to_json() const {
  auto synth_j = synth.to_json();
  synth_j.erase("intervention");
  return {{"paths",
           {{"work_dir", work_dir.string()},
            {"dump", dump.string()},
            {"registry", registry.string()},
            {"toxicity_scores", toxicity_scores.string()},
            {"lexicon_dir", lexicon_dir.string()}}},
          {"task", std::string(task_name(task))},
          {"intervention", intervention.to_json()},
          {"fields", fields.to_json()},
          {"cohort",
           {{"remove_bots", cohort.remove_bots},
            {"bot_gap_seconds", cohort.bot_gap_seconds},
            {"require_consistency", cohort.require_consistency},
            {"drop_externally_inactive", cohort.drop_externally_inactive}}},
          {"features",
           {{"strip_markdown", text.strip_markdown},
            {"skip_placeholder_bodies", text.skip_placeholder_bodies},
            {"impute", impute}}},
          {"groups", {{"min_comments", group_min_comments}}},
          {"loocv", {{"models", model_list(loocv_models)}}},
          {"bins", {{"models", model_list(bins_models)}}},
          {"ablation", {{"model", std::string(model_kind_name(ablation_model))}}},
          {"pipeline", pipeline.to_json()},
          {"importance", importance.to_json()},
          {"synth", synth_j}};
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j, "config", {"paths", "task", "intervention", "fields", "cohort", "features", "groups", "loocv",
                               "bins", "ablation", "pipeline", "importance", "synth"});
  RunConfig c;
  try {
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      reject_unknown(p, "paths", {"work_dir", "dump", "registry", "toxicity_scores", "lexicon_dir"});
      c.work_dir = p.value("work_dir", c.work_dir.string());
      c.dump = p.value("dump", std::string());
      c.registry = p.value("registry", std::string());
      c.toxicity_scores = p.value("toxicity_scores", std::string());
      c.lexicon_dir = p.value("lexicon_dir", std::string());
    }
    if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
    if (j.contains("intervention")) {
      reject_unknown(j.at("intervention"), "intervention",
                     {"t0", "pre_days", "post_days", "soft_offset_days", "count_t0_as_day", "banned_communities"});
      c.intervention = InterventionSpec::from_json(j.at("intervention"));
    }
    if (j.contains("fields")) c.fields = FieldMapping::from_json(j.at("fields"));
    if (j.contains("cohort")) {
      const auto& s = j.at("cohort");
      reject_unknown(s, "cohort", {"remove_bots", "bot_gap_seconds", "require_consistency", "drop_externally_inactive"});
      c.cohort.remove_bots = s.value("remove_bots", c.cohort.remove_bots);
      c.cohort.bot_gap_seconds = s.value("bot_gap_seconds", c.cohort.bot_gap_seconds);
      c.cohort.require_consistency = s.value("require_consistency", c.cohort.require_consistency);
      c.cohort.drop_externally_inactive = s.value("drop_externally_inactive", c.cohort.drop_externally_inactive);
    }
    if (j.contains("features")) {
      const auto& s = j.at("features");
      reject_unknown(s, "features", {"strip_markdown", "skip_placeholder_bodies", "impute"});
      c.text.strip_markdown = s.value("strip_markdown", c.text.strip_markdown);
      c.text.skip_placeholder_bodies = s.value("skip_placeholder_bodies", c.text.skip_placeholder_bodies);
      c.impute = s.value("impute", c.impute);
    }
    if (j.contains("groups")) {
      reject_unknown(j.at("groups"), "groups", {"min_comments"});
      c.group_min_comments = j.at("groups").value("min_comments", c.group_min_comments);
    }
    if (j.contains("loocv")) {
      reject_unknown(j.at("loocv"), "loocv", {"models"});
      if (j.at("loocv").contains("models")) c.loocv_models = parse_models(j.at("loocv").at("models"));
    }
    if (j.contains("bins")) {
      reject_unknown(j.at("bins"), "bins", {"models"});
      if (j.at("bins").contains("models")) c.bins_models = parse_models(j.at("bins").at("models"));
    }
    if (j.contains("ablation")) {
      reject_unknown(j.at("ablation"), "ablation", {"model"});
      if (j.at("ablation").contains("model"))
        c.ablation_model = parse_model_kind(j.at("ablation").at("model").get<std::string>());
    }
    if (j.contains("pipeline")) c.pipeline = PipelineConfig::from_json(j.at("pipeline"));
    if (j.contains("importance")) c.importance = ImportanceConfig::from_json(j.at("importance"));
    if (j.contains("synth")) {
      auto s = j.at("synth");
      if (s.is_object() && s.contains("intervention"))
        throw UsageError("the synthetic cohort uses the top-level 'intervention' settings");
      c.synth = SynthConfig::from_json(s);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  } catch (const DataError& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  c.synth.intervention = c.intervention;
  c.synth.intervention.banned_communities.clear();
  if (c.group_min_comments == 0) throw UsageError("groups.min_comments must be positive");
  require_exists(c.dump, "dump");
  require_exists(c.registry, "feature registry");
  require_exists(c.toxicity_scores, "toxicity score file");
  require_exists(c.lexicon_dir, "lexicon directory");
  return c;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("override '" + assignment + "' is not of the form key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw UsageError("override '" + assignment + "' has an empty key");
    if (!node->is_object()) throw UsageError("override '" + assignment + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig load_run_config(const fs::path& file, const std::vector<std::string>& overrides) {
  json merged = RunConfig{}.to_json();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read config file '" + file.string() + "'");
    json loaded = json::parse(in, nullptr, false);
    if (loaded.is_discarded() || !loaded.is_object())
      throw UsageError("config file '" + file.string() + "' is not a JSON object");
    // Lists such as k_grid and models are replaced as a whole.
    merged.merge_patch(loaded);
  }
  for (const auto& o : overrides) apply_override(merged, o);
  return RunConfig::from_json(merged);
}

}  // namespace abandon::cli
