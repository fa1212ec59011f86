#pragma once

#include <concepts>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddc/config.hpp"

namespace ddc {

struct ExperimentInfo {
  std::string name;
  std::string family;  // diffusion | levy
  std::string summary;
};

const std::vector<ExperimentInfo>& experiment_catalog();
bool known_experiment(const std::string& name);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

/// Fixed-precision text for CSV cells, identical across runs.
std::string cell(double v);
template <std::integral I>
std::string cell(I v) {
  return std::to_string(v);
}
std::string cell(const std::string& s);

struct ExperimentReport {
  std::string experiment;
  CsvTable rows;     // one line per replicate (or per evaluation point)
  CsvTable ratefit;  // empty when no rate is fitted
  nlohmann::json summary;
  bool passed = true;
  std::string verdict;
  std::size_t failures = 0;
};

/// Throws ConfigError for unknown experiments or models. A replicate that
/// throws is recorded as a failed row; the run continues without it.
ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Writes <root>/<experiment>/{rows.csv,summary.json[,ratefit.csv]}; returns the directory.
std::filesystem::path write_report(const ExperimentReport& report, const std::filesystem::path& root);

/// Pilot-frozen bounds for the exploration budget check at the default
/// cap constant: the 5th percentile of S_T / T^(2/3) must reach the floor and
/// the 95th percentile of N0_T / T^(2/3) must stay under the ceiling.
inline constexpr double kExploreShareFloor = 3.0;
inline constexpr double kExploreEpisodeCeiling = 0.55;
inline constexpr double kDefaultCapConstant = 3.2;

}  // namespace ddc
