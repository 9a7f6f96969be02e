#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace abandon {

enum class FeatureClass { Activity = 0, Toxicity = 1, Style = 2, Relational = 3 };
inline constexpr int kFeatureClassCount = 4;
inline constexpr std::array<int, kFeatureClassCount> kExpectedClassSizes = {30, 40, 36, 36};
inline constexpr int kExpectedFeatureCount = 142;

std::string_view feature_class_name(FeatureClass c);
FeatureClass parse_feature_class(std::string_view name);

struct UserProfile;
struct CohortContext;
using FeatureFn = std::function<double(const UserProfile&, const CohortContext&)>;

struct FeatureEntry {
  std::string name;
  FeatureClass cls = FeatureClass::Activity;
  std::string extractor;
  nlohmann::json params = nlohmann::json::object();
};

// Ordered catalog of features. Loading validates every entry against the
// known extractors and enforces the per-class counts; each entry is compiled
// into a callable once.
class FeatureRegistry {
 public:
  static FeatureRegistry from_json(const nlohmann::json& j);
  static FeatureRegistry load(const std::filesystem::path& path);
  static const FeatureRegistry& builtin();

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  const std::vector<FeatureEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::vector<std::string> names() const;
  std::vector<FeatureClass> classes() const;
  std::size_t index_of(std::string_view name) const;  // throws when absent
  const std::string& version() const { return version_; }
  // FNV-1a over the canonical JSON form.
  const std::string& hash() const { return hash_; }
  const FeatureFn& compiled(std::size_t i) const { return compiled_[i]; }

 private:
  std::string version_;
  std::vector<FeatureEntry> entries_;
  std::vector<FeatureFn> compiled_;
  std::string hash_;
};

// Builds the callable for one entry; throws DataError for unknown
// extractors or invalid parameters.
FeatureFn compile_feature(const FeatureEntry& entry);

}  // namespace abandon
