#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ximarkov/error.hpp"

namespace ximarkov::lab {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"shuffle", "additive-error", "equicorrelated", "t4d",
                                              "dirac",   "si-convergence", "diagnostics"};
  return names;
}

/// Parsed config file plus command-line overrides. Experiment-specific settings
/// stay in `params` and are validated by each experiment before it runs.
struct ExperimentConfig {
  std::string experiment;
  nlohmann::json params = nlohmann::json::object();
  long long samples = 100000;
  int grid = 256;
  std::uint64_t seed = 20240601;
  std::filesystem::path out_dir = "out";

  template <class T>
  T param(const std::string& key, T fallback) const {
    if (!params.contains(key)) return fallback;
    try {
      return params.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::InvalidParameter, "parameter '" + key + "': " + e.what());
    }
  }
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::InvalidParameter, "config must be a JSON object");
  static const std::vector<std::string> known{"experiment", "params", "samples", "grid", "seed", "out"};
  for (const auto& [key, value] : j.items()) {
    require(std::find(known.begin(), known.end(), key) != known.end(), ErrorKind::InvalidParameter,
            "unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    c.experiment = j.value("experiment", std::string{});
    if (j.contains("params")) c.params = j.at("params");
    c.samples = j.value("samples", c.samples);
    c.grid = j.value("grid", c.grid);
    c.seed = j.value("seed", c.seed);
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidParameter, e.what());
  }
  require(c.params.is_object(), ErrorKind::InvalidParameter, "'params' must be an object");
  require(c.samples >= 1, ErrorKind::InvalidParameter, "samples must be positive");
  require(c.grid >= 2, ErrorKind::InvalidParameter, "grid must be at least 2");
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidParameter, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace ximarkov::lab
