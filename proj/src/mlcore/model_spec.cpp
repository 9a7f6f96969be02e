#include "abandon/mlcore/model_spec.hpp"

#include <cmath>
#include <limits>

#include "abandon/common/error.hpp"

namespace abandon {

using nlohmann::json;

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::NB: return "NB";
    case ModelKind::KNN: return "KNN";
    case ModelKind::DT: return "DT";
    case ModelKind::RF: return "RF";
    case ModelKind::AB: return "AB";
    case ModelKind::GB: return "GB";
    case ModelKind::SVM: return "SVM";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : kAllModelKinds) {
    if (model_kind_name(k) == name) return k;
  }
  throw UsageError("unknown model '" + std::string(name) + "' (expected NB, KNN, DT, RF, AB, GB or SVM)");
}

bool is_ensemble_kind(ModelKind k) { return k == ModelKind::RF || k == ModelKind::AB || k == ModelKind::GB; }

std::array<double, 2> ClassWeighting::resolve(const Labels& y) const {
  switch (mode) {
    case Mode::None: return {1.0, 1.0};
    case Mode::Custom: return custom;
    case Mode::Balanced: {
      double n1 = 0;
      for (int v : y) n1 += v == 1;
      double n = static_cast<double>(y.size()), n0 = n - n1;
      if (n0 == 0 || n1 == 0) return {1.0, 1.0};
      return {n / (2 * n0), n / (2 * n1)};
    }
  }
  return {1.0, 1.0};
}

json ClassWeighting::to_json() const {
  switch (mode) {
    case Mode::None: return "none";
    case Mode::Balanced: return "balanced";
    case Mode::Custom: return json::array({custom[0], custom[1]});
  }
  return nullptr;
}

ClassWeighting ClassWeighting::from_json(const json& j) {
  ClassWeighting w;
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "none")) return w;
  if (j.is_string() && j.get<std::string>() == "balanced") {
    w.mode = Mode::Balanced;
    return w;
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    w.mode = Mode::Custom;
    w.custom = {j[0].get<double>(), j[1].get<double>()};
    if (!(w.custom[0] > 0 && w.custom[1] > 0)) throw UsageError("class weights must be positive");
    return w;
  }
  throw UsageError("class_weight must be \"none\", \"balanced\" or [w0, w1]");
}

json ModelSpec::to_json() const {
  return {{"kind", std::string(model_kind_name(kind))},
          {"params", params},
          {"class_weight", weighting.to_json()},
          {"seed", seed},
          {"ensemble_size", ensemble_size},
          {"member_resampling", member_resampling}};
}

ModelSpec ModelSpec::from_json(const json& j) {
  ModelSpec s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  s.params = with_defaults(s.kind, j.value("params", json::object()));
  s.weighting = ClassWeighting::from_json(j.value("class_weight", json("none")));
  s.seed = j.value("seed", std::uint64_t{0});
  s.ensemble_size = j.value("ensemble_size", 1);
  s.member_resampling = j.value("member_resampling", false);
  if (s.ensemble_size < 1) throw UsageError("ensemble_size must be >= 1");
  return s;
}

namespace {

enum class ParamType { Real, Int, IntOrNull, RealOrNull };

struct ParamDomain {
  const char* key;
  ParamType type;
  double lo, hi;  // inclusive
  json fallback;
};

const std::vector<ParamDomain>& schema(ModelKind k) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  static const std::vector<ParamDomain> nb = {{"var_smoothing", ParamType::Real, 0.0, 1.0, 1e-9}};
  static const std::vector<ParamDomain> knn = {{"k", ParamType::Int, 1, 1e6, 5}};
  static const std::vector<ParamDomain> dt = {{"max_depth", ParamType::IntOrNull, 1, 256, nullptr},
                                              {"min_samples_leaf", ParamType::Int, 1, 1e9, 1},
                                              {"min_samples_split", ParamType::Int, 2, 1e9, 2}};
  static const std::vector<ParamDomain> rf = {{"n_estimators", ParamType::Int, 1, 1e5, 100},
                                              {"max_depth", ParamType::IntOrNull, 1, 256, nullptr},
                                              {"min_samples_leaf", ParamType::Int, 1, 1e9, 1},
                                              {"max_features", ParamType::RealOrNull, 1e-9, 1.0, nullptr}};
  static const std::vector<ParamDomain> ab = {{"n_estimators", ParamType::Int, 1, 1e5, 50},
                                              {"learning_rate", ParamType::Real, 1e-9, inf, 1.0},
                                              {"max_depth", ParamType::Int, 1, 64, 1}};
  static const std::vector<ParamDomain> gb = {{"n_estimators", ParamType::Int, 1, 1e5, 100},
                                              {"learning_rate", ParamType::Real, 1e-9, 1.0, 0.1},
                                              {"max_depth", ParamType::Int, 1, 64, 3},
                                              {"min_samples_leaf", ParamType::Int, 1, 1e9, 1},
                                              {"l2", ParamType::Real, 0.0, inf, 1.0}};
  static const std::vector<ParamDomain> svm = {{"C", ParamType::Real, 1e-12, inf, 1.0},
                                               {"epochs", ParamType::Int, 1, 1e5, 20},
                                               {"eta0", ParamType::Real, 1e-12, inf, 0.01}};
  switch (k) {
    case ModelKind::NB: return nb;
    case ModelKind::KNN: return knn;
    case ModelKind::DT: return dt;
    case ModelKind::RF: return rf;
    case ModelKind::AB: return ab;
    case ModelKind::GB: return gb;
    case ModelKind::SVM: return svm;
  }
  return nb;
}

void check_value(ModelKind k, const ParamDomain& d, const json& v) {
  auto fail = [&](const std::string& why) {
    throw UsageError(std::string(model_kind_name(k)) + " hyperparameter '" + d.key + "' " + why);
  };
  bool nullable = d.type == ParamType::IntOrNull || d.type == ParamType::RealOrNull;
  if (v.is_null()) {
    if (!nullable) fail("may not be null");
    return;
  }
  if (!v.is_number()) fail("must be a number");
  bool integral = d.type == ParamType::Int || d.type == ParamType::IntOrNull;
  double x = v.get<double>();
  if (integral && (!v.is_number_integer() && std::floor(x) != x)) fail("must be an integer");
  if (!(x >= d.lo && x <= d.hi)) fail("is outside [" + json(d.lo).dump() + ", " + json(d.hi).dump() + "]");
}

}  // namespace

Hyperparams default_hyperparams(ModelKind k) {
  Hyperparams p = Hyperparams::object();
  for (const auto& d : schema(k)) p[d.key] = d.fallback;
  return p;
}

void validate_hyperparams(ModelKind k, const Hyperparams& params) {
  if (!params.is_object()) throw UsageError("hyperparameters must be an object");
  for (const auto& [key, value] : params.items()) {
    const ParamDomain* found = nullptr;
    for (const auto& d : schema(k)) {
      if (key == d.key) found = &d;
    }
    if (!found) throw UsageError(std::string(model_kind_name(k)) + " has no hyperparameter '" + key + "'");
    check_value(k, *found, value);
  }
}

Hyperparams with_defaults(ModelKind k, const Hyperparams& given) {
  validate_hyperparams(k, given);
  Hyperparams p = default_hyperparams(k);
  for (const auto& [key, value] : given.items()) p[key] = value;
  return p;
}

double param_real(const Hyperparams& p, const char* key) {
  if (!p.contains(key) || !p.at(key).is_number()) throw UsageError(std::string("missing hyperparameter ") + key);
  return p.at(key).get<double>();
}

int param_int(const Hyperparams& p, const char* key) { return static_cast<int>(std::llround(param_real(p, key))); }

int param_int_or(const Hyperparams& p, const char* key, int unlimited) {
  if (p.contains(key) && p.at(key).is_null()) return unlimited;
  return param_int(p, key);
}

std::vector<Hyperparams> expand_grid(const json& grid) {
  if (!grid.is_object()) throw UsageError("a hyperparameter grid must be an object of value lists");
  std::vector<Hyperparams> points{Hyperparams::object()};
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) throw UsageError("grid entry '" + key + "' must be a non-empty list");
    std::vector<Hyperparams> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        auto q = p;
        q[key] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

json default_grids() {
  return {
      {"NB", {{"var_smoothing", {1e-9, 1e-7, 1e-5}}}},
      {"KNN", {{"k", {3, 5, 11}}}},
      {"DT", {{"max_depth", {3, 5, 10, nullptr}}}},
      {"RF", {{"n_estimators", {100, 300}}}},
      {"AB", {{"n_estimators", {50, 100}}, {"learning_rate", {0.5, 1.0}}}},
      {"GB", {{"learning_rate", {0.05, 0.1}}, {"n_estimators", {100, 300}}}},
      {"SVM", {{"C", {0.1, 1.0, 10.0}}}},
  };
}

}  // namespace abandon
