#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icp/experiments.hpp"
#include "icp/model.hpp"
#include "icp/simulator.hpp"

namespace icp {

/// Malformed or invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment description as read from a JSON config file:
///   {"profile": {...}, "lambda" | "lambda_grid": ..., "start": n, "tmax": f,
///    "rmax": n, "runs": n, "p_floor": f, "ci_level": f}
/// A missing "rmax" defaults to 2 * tmax; an explicit null disables the cutoff.
struct ExperimentConfig {
  RateProfile profile = RateProfile::one_sided();
  std::optional<double> lambda;
  std::vector<double> lambda_grid;
  Site start = 0;
  double tmax = kDefaultHorizon;
  std::optional<Site> rmax = static_cast<Site>(2 * kDefaultHorizon);
  std::uint64_t runs = 1000;
  double p_floor = kDefaultPFloor;
  double ci_level = kDefaultCiLevel;

  StopRule stop_rule() const { return {tmax, rmax}; }
};

/// {"kind": "homogeneous", "params": [p, d]} or
/// {"kind": "tabulated", "p": [...], "delta": [...]}.
RateProfile profile_from_json(const nlohmann::json& j);
nlohmann::ordered_json profile_to_json(const RateProfile& profile);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace icp
