#include "icp/config.hpp"

#include <cmath>
#include <fstream>

namespace icp {

namespace {

using nlohmann::json;

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

Site get_site(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(std::string("config field '") + key + "' must be a non-negative integer");
  }
  return v.get<Site>();
}

}  // namespace

RateProfile profile_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("profile must be a JSON object");
  try {
    const ProfileKind kind = profile_kind_from_string(get_field<std::string>(j, "kind"));
    if (kind == ProfileKind::Tabulated) {
      return RateProfile::tabulated(get_field<std::vector<double>>(j, "p"),
                                    get_field<std::vector<double>>(j, "delta"));
    }
    const auto params = j.contains("params") ? get_field<std::vector<double>>(j, "params") : std::vector<double>{};
    return RateProfile::make(kind, params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid profile: ") + e.what());
  }
}

nlohmann::ordered_json profile_to_json(const RateProfile& profile) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(profile.kind()));
  if (profile.kind() == ProfileKind::Tabulated) {
    j["p"] = profile.p_table();
    j["delta"] = profile.delta_table();
  } else {
    j["params"] = profile.params();
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("profile")) throw ConfigError("config is missing 'profile'");
  c.profile = profile_from_json(j.at("profile"));
  if (j.contains("lambda")) {
    c.lambda = get_field<double>(j, "lambda");
    if (!(*c.lambda > 0.0) || !std::isfinite(*c.lambda)) throw ConfigError("'lambda' must be positive");
  }
  if (j.contains("lambda_grid")) {
    c.lambda_grid = get_field<std::vector<double>>(j, "lambda_grid");
    for (std::size_t i = 0; i < c.lambda_grid.size(); ++i) {
      if (!(c.lambda_grid[i] > 0.0) || (i > 0 && !(c.lambda_grid[i] > c.lambda_grid[i - 1]))) {
        throw ConfigError("'lambda_grid' must be positive and strictly increasing");
      }
    }
  }
  if (j.contains("start")) c.start = get_site(j, "start");
  if (j.contains("tmax")) {
    c.tmax = get_field<double>(j, "tmax");
    if (!(c.tmax > 0.0)) throw ConfigError("'tmax' must be positive");
  }
  if (j.contains("rmax")) {
    c.rmax = j.at("rmax").is_null() ? std::nullopt : std::optional<Site>(get_site(j, "rmax"));
  } else {
    c.rmax = static_cast<Site>(std::ceil(2.0 * c.tmax));
  }
  if (c.rmax && *c.rmax <= c.start) throw ConfigError("'rmax' must exceed 'start'");
  if (j.contains("runs")) {
    c.runs = get_site(j, "runs");
    if (c.runs == 0) throw ConfigError("'runs' must be >= 1");
  }
  if (j.contains("p_floor")) {
    c.p_floor = get_field<double>(j, "p_floor");
    if (!(c.p_floor > 0.0 && c.p_floor < 1.0)) throw ConfigError("'p_floor' must lie in (0, 1)");
  }
  if (j.contains("ci_level")) {
    c.ci_level = get_field<double>(j, "ci_level");
    if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) throw ConfigError("'ci_level' must lie in (0, 1)");
  }
  return c;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["profile"] = profile_to_json(c.profile);
  if (c.lambda) j["lambda"] = *c.lambda;
  if (!c.lambda_grid.empty()) j["lambda_grid"] = c.lambda_grid;
  j["start"] = c.start;
  j["tmax"] = c.tmax;
  j["rmax"] = c.rmax ? nlohmann::ordered_json(*c.rmax) : nlohmann::ordered_json(nullptr);
  j["runs"] = c.runs;
  j["p_floor"] = c.p_floor;
  j["ci_level"] = c.ci_level;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace icp
