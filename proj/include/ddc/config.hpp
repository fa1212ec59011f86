#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddc/diffusion.hpp"
#include "ddc/levy.hpp"

namespace ddc {

/// Thrown for malformed configuration files and unknown names.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One experiment run as read from a JSON file.
///
/// Recognised keys: experiment, model, grid, replicates, seed, dt, output,
/// tolerances (object of numbers) and settings (experiment-specific object).
/// `model` is either a registry name or an object of spec fields with an
/// optional "name".
struct ExperimentConfig {
  std::string experiment;
  std::string model = "ou";
  nlohmann::json model_spec;  // null unless the model was given inline
  std::vector<double> grid;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  double dt = 1e-2;
  std::string output = "results";
  std::map<std::string, double> tolerances;
  nlohmann::json settings = nlohmann::json::object();

  double tolerance(const std::string& key, double fallback) const;

  template <class T>
  T setting(const std::string& key, const T& fallback) const {
    return settings.contains(key) ? settings.at(key).get<T>() : fallback;
  }
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::json to_json(const ExperimentConfig& config);

/// Registry names: ou, tanh-drift, bumped-ou, piecewise.
DiffusionModel resolve_diffusion(const ExperimentConfig& config);
/// Registry names are those of make_levy_model.
LevyModel resolve_levy(const ExperimentConfig& config);

std::vector<std::string> diffusion_registry();

}  // namespace ddc
