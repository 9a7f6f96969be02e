#include "workspace.hpp"

#include <fstream>

#include "abandon/common/error.hpp"
#include "abandon/common/hash.hpp"
#include "abandon/common/log.hpp"

namespace abandon::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestFile = "manifest.json";

std::string current_hash(const fs::path& p) {
  if (!fs::exists(p)) return "missing";
  return hash_path(p);
}

}  // namespace

Workspace::Workspace(fs::path root, bool force) : root_(std::move(root)), force_(force) {}

bool Workspace::has_manifest(const std::string& stage) const { return fs::exists(stage_dir(stage) / kManifestFile); }

json Workspace::manifest(const std::string& stage) const {
  const auto path = stage_dir(stage) / kManifestFile;
  if (!fs::exists(path))
    throw DataError("missing artifact: no output of stage '" + stage + "' in " + root_.string() +
                    " (run that stage first)");
  std::ifstream in(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("outputs"))
    throw DataError("manifest " + path.string() + " is unreadable");
  if (j.value("manifest_version", 0) != kManifestVersion)
    throw DataError("manifest " + path.string() + " has an unsupported version");
  return j;
}

fs::path Workspace::artifact(const std::string& stage, const std::string& name) const {
  const auto m = manifest(stage);
  if (!m["outputs"].contains(name))
    throw DataError("missing artifact: stage '" + stage + "' recorded no '" + name + "'");
  auto path = resolve(m["outputs"][name]["path"].get<std::string>());
  if (!fs::exists(path)) throw DataError("missing artifact: " + path.string() + " (rerun stage '" + stage + "')");
  return path;
}

std::string Workspace::stored_path(const fs::path& p) const {
  auto rel = p.lexically_relative(root_);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return fs::absolute(p).lexically_normal().generic_string();
}

fs::path Workspace::resolve(const std::string& stored) const {
  fs::path p(stored);
  return p.is_absolute() ? p : root_ / p;
}

void Workspace::stale(const std::string& message) const {
  if (force_) {
    log::warn("continuing with a stale artifact", {{"reason", message}});
    return;
  }
  throw StaleArtifactError(message + " (rerun the upstream stage, or pass --force)");
}

void Workspace::check_fresh(const std::string& stage, const std::string& name) const {
  const auto m = manifest(stage);
  if (!m["outputs"].contains(name))
    throw DataError("missing artifact: stage '" + stage + "' recorded no '" + name + "'");
  const auto& rec = m["outputs"][name];
  const auto path = resolve(rec["path"].get<std::string>());
  if (!fs::exists(path)) throw DataError("missing artifact: " + path.string() + " (rerun stage '" + stage + "')");
  if (current_hash(path) != rec["hash"].get<std::string>())
    stale("'" + name + "' of stage '" + stage + "' changed after the stage wrote it");
  std::set<std::string> seen;
  check_stage(stage, seen);
}

void Workspace::check_stage(const std::string& stage, std::set<std::string>& seen) const {
  if (!seen.insert(stage).second) return;
  const auto m = manifest(stage);
  for (const auto& [name, rec] : m["inputs"].items()) {
    const auto path = resolve(rec["path"].get<std::string>());
    if (current_hash(path) != rec["hash"].get<std::string>()) {
      stale("stage '" + stage + "' is out of date: its input '" + name + "' (" + path.string() + ") has changed");
      continue;
    }
    if (rec.contains("stage")) {
      const auto upstream = rec["stage"].get<std::string>();
      if (!has_manifest(upstream)) {
        stale("stage '" + stage + "' was built from stage '" + upstream + "', whose manifest is gone");
        continue;
      }
      check_stage(upstream, seen);
    }
  }
}

StageRun::StageRun(const Workspace& ws, std::string stage, json config, int threads)
    : ws_(ws), stage_(std::move(stage)), config_(std::move(config)), threads_(threads),
      started_(std::chrono::steady_clock::now()) {
  fs::create_directories(dir());
  // A run that fails part way must not leave the previous manifest behind.
  fs::remove(dir() / kManifestFile);
  log::info("stage started", {{"stage", stage_}});
}

fs::path StageRun::use(const std::string& upstream, const std::string& name) {
  ws_.check_fresh(upstream, name);
  auto path = ws_.artifact(upstream, name);
  inputs_[upstream + "/" + name] = {
      {"stage", upstream}, {"path", ws_.stored_path(path)}, {"hash", current_hash(path)}};
  return path;
}

void StageRun::use_external(const std::string& name, const fs::path& path) {
  if (!fs::exists(path)) throw IoError("input '" + path.string() + "' does not exist");
  inputs_[name] = {{"path", ws_.stored_path(path)}, {"hash", current_hash(path)}};
}

void StageRun::produce(const std::string& name, const fs::path& path) { outputs_[name] = path; }

void StageRun::seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void StageRun::note(const std::string& key, json value) { notes_[key] = std::move(value); }

void StageRun::finish() {
  json outputs = json::object();
  for (const auto& [name, path] : outputs_) {
    if (!fs::exists(path)) throw IoError("stage '" + stage_ + "' did not write " + path.string());
    outputs[name] = {{"path", ws_.stored_path(path)}, {"hash", current_hash(path)}};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  json m = {{"stage", stage_},
            {"manifest_version", kManifestVersion},
            {"config", config_},
            {"seeds", seeds_},
            {"inputs", inputs_},
            {"outputs", outputs},
            {"threads", threads_},
            {"timings", {{"seconds", seconds}}}};
  if (!notes_.empty()) m["summary"] = notes_;
  const auto path = dir() / kManifestFile;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << m.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
  log::info("stage finished", {{"stage", stage_}, {"seconds", std::to_string(seconds)}});
}

}  // namespace abandon::cli
