#include "abandon/features/feature_matrix.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <unordered_map>

#include "abandon/common/binary_io.hpp"
#include "abandon/common/error.hpp"
#include "abandon/common/stats.hpp"

namespace abandon {

std::size_t FeatureMatrix::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw UsageError("feature '" + std::string(name) + "' is not in the matrix");
}

std::vector<std::size_t> FeatureMatrix::class_columns(FeatureClass c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == c) out.push_back(i);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_users(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < user_ids.size(); ++i) pos.emplace(user_ids[i], i);
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = pos.find(id);
    if (it == pos.end()) throw DataError("user '" + id + "' has no feature row");
    rows.push_back(it->second);
  }
  FeatureMatrix out = *this;
  out.user_ids = ids;
  out.values = values.select_rows(rows);
  return out;
}

void FeatureMatrix::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  BinaryWriter w(out);
  w.write_bytes("ABFM", 4);
  w.write<std::uint32_t>(kFeatureMatrixFormatVersion);
  w.write_string(registry_version);
  w.write_string(registry_hash);
  w.write<std::uint64_t>(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    w.write_string(names[i]);
    w.write<std::uint8_t>(static_cast<std::uint8_t>(classes[i]));
  }
  w.write<std::uint64_t>(user_ids.size());
  for (const auto& u : user_ids) w.write_string(u);
  w.write_doubles(values.data());
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureMatrix FeatureMatrix::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read feature matrix " + path.string());
  BinaryReader r(in);
  r.expect_magic("ABFM", "feature matrix");
  auto version = r.read<std::uint32_t>();
  if (version != kFeatureMatrixFormatVersion) {
    throw DataError("feature matrix " + path.string() + " has format version " + std::to_string(version) +
                    "; this build reads version " + std::to_string(kFeatureMatrixFormatVersion));
  }
  FeatureMatrix fm;
  fm.registry_version = r.read_string();
  fm.registry_hash = r.read_string();
  auto nf = r.read<std::uint64_t>();
  for (std::uint64_t i = 0; i < nf; ++i) {
    fm.names.push_back(r.read_string());
    auto c = r.read<std::uint8_t>();
    if (c >= kFeatureClassCount) throw DataError("corrupt feature class tag in " + path.string());
    fm.classes.push_back(static_cast<FeatureClass>(c));
  }
  auto nu = r.read<std::uint64_t>();
  for (std::uint64_t i = 0; i < nu; ++i) fm.user_ids.push_back(r.read_string());
  auto data = r.read_doubles();
  if (data.size() != nu * nf) throw DataError("feature matrix " + path.string() + " is truncated");
  fm.values = Matrix(nu, nf);
  fm.values.data() = std::move(data);
  return fm;
}

void FeatureMatrix::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "user_id";
  for (const auto& n : names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < users(); ++i) {
    out << user_ids[i];
    for (double v : values.row(i)) out << ',' << v;
    out << '\n';
  }
}

nlohmann::json ImputationReport::to_json() const {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& x : features) f.push_back({{"feature", x.name}, {"missing", x.missing}, {"fill", x.fill}});
  return {{"cells", cells}, {"imputed_cells", imputed_cells}, {"features", f}};
}

ImputationReport impute_medians(FeatureMatrix& fm) {
  ImputationReport report;
  report.cells = fm.users() * fm.features();
  for (std::size_t c = 0; c < fm.features(); ++c) {
    std::vector<double> observed;
    std::size_t missing = 0;
    for (std::size_t r = 0; r < fm.users(); ++r) {
      double v = fm.values(r, c);
      if (std::isnan(v)) {
        ++missing;
      } else {
        observed.push_back(v);
      }
    }
    if (missing == 0) continue;
    double fill = observed.empty() ? 0.0 : stats::median(std::move(observed));
    for (std::size_t r = 0; r < fm.users(); ++r) {
      if (std::isnan(fm.values(r, c))) fm.values(r, c) = fill;
    }
    report.imputed_cells += missing;
    report.features.push_back({fm.names[c], missing, fill});
  }
  return report;
}

}  // namespace abandon
