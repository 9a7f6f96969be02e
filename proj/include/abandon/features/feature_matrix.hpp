#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "abandon/common/matrix.hpp"
#include "abandon/features/registry.hpp"

namespace abandon {

inline constexpr std::uint32_t kFeatureMatrixFormatVersion = 1;

// Users × features, row order matching user_ids.
struct FeatureMatrix {
  std::vector<std::string> user_ids;
  std::vector<std::string> names;
  std::vector<FeatureClass> classes;
  Matrix values;
  std::string registry_version;
  std::string registry_hash;

  std::size_t users() const { return values.rows(); }
  std::size_t features() const { return values.cols(); }
  std::size_t column_index(std::string_view name) const;  // throws UsageError when absent
  std::vector<std::size_t> class_columns(FeatureClass c) const;

  // Rows for the given users, in that order; throws when a user is absent.
  FeatureMatrix select_users(const std::vector<std::string>& ids) const;

  void save(const std::filesystem::path& path) const;
  static FeatureMatrix load(const std::filesystem::path& path);
  void write_csv(const std::filesystem::path& path) const;

  bool operator==(const FeatureMatrix&) const = default;
};

struct ImputedFeature {
  std::string name;
  std::size_t missing = 0;
  double fill = 0.0;
};

struct ImputationReport {
  std::size_t cells = 0;
  std::size_t imputed_cells = 0;
  std::vector<ImputedFeature> features;  // only features with at least one gap

  nlohmann::json to_json() const;
};

// Replaces NaN cells by the median of the column's observed values (0 when
// the whole column is missing).
ImputationReport impute_medians(FeatureMatrix& fm);

}  // namespace abandon
