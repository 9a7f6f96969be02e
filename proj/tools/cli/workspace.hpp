#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include <json.hpp>

namespace abandon::cli {

inline constexpr int kManifestVersion = 1;

// The run directory: one subdirectory per stage, each holding the stage's
// artifacts and a manifest.json naming them with their content hashes.
class Workspace {
 public:
  Workspace(std::filesystem::path root, bool force);

  const std::filesystem::path& root() const { return root_; }
  bool force() const { return force_; }
  std::filesystem::path stage_dir(const std::string& stage) const { return root_ / stage; }
  bool has_manifest(const std::string& stage) const;
  // Throws DataError naming the stage to run when the manifest is absent.
  nlohmann::json manifest(const std::string& stage) const;

  // Location of an output recorded by a stage. Throws DataError when the
  // stage or the artifact is missing.
  std::filesystem::path artifact(const std::string& stage, const std::string& name) const;

  // Checks that the artifact still has the hash its stage recorded and that
  // the stage's own inputs, transitively, are unchanged. Throws
  // StaleArtifactError on a mismatch unless the workspace was opened with
  // force, in which case a warning is logged.
  void check_fresh(const std::string& stage, const std::string& name) const;

  std::string stored_path(const std::filesystem::path& p) const;
  std::filesystem::path resolve(const std::string& stored) const;

 private:
  void check_stage(const std::string& stage, std::set<std::string>& seen) const;
  void stale(const std::string& message) const;

  std::filesystem::path root_;
  bool force_;
};

// Builds and writes one stage manifest:
//   {"stage", "manifest_version", "config", "seeds", "inputs", "outputs",
//    "timings": {"seconds"}, "threads"}
class StageRun {
 public:
  StageRun(const Workspace& ws, std::string stage, nlohmann::json config, int threads);

  const std::string& stage() const { return stage_; }
  std::filesystem::path dir() const { return ws_.stage_dir(stage_); }

  // Records an artifact of an upstream stage, after checking it is fresh.
  std::filesystem::path use(const std::string& upstream, const std::string& name);
  // Records a file from outside the workspace.
  void use_external(const std::string& name, const std::filesystem::path& path);
  void produce(const std::string& name, const std::filesystem::path& path);
  void seed(const std::string& name, std::uint64_t value);
  void note(const std::string& key, nlohmann::json value);

  // Hashes the outputs and writes manifest.json.
  void finish();

 private:
  const Workspace& ws_;
  std::string stage_;
  nlohmann::json config_;
  int threads_;
  nlohmann::json inputs_ = nlohmann::json::object();
  std::map<std::string, std::filesystem::path> outputs_;
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json notes_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point started_;
};

}  // namespace abandon::cli
