#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace sqkf::bench {

enum class Scenario { kRandom, kIllConditioned, kFromFile };
enum class Precision { kSingle, kDouble };

std::string to_string(Scenario s);
std::string to_string(Precision p);
Scenario scenario_from_string(const std::string& s);
Precision precision_from_string(const std::string& s);

/// Everything that determines one experiment run. Output is a pure
/// function of this struct (the seed included), so reruns with an equal
/// config are byte-identical.
struct ExperimentConfig {
  Scenario scenario = Scenario::kRandom;
  std::size_t state_dim = 4;
  std::size_t measurement_dim = 2;
  std::size_t control_dim = 0;
  std::size_t steps = 100;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  Precision precision = Precision::kDouble;
  std::optional<double> epsilon;  // ill-conditioned scenario only
  std::filesystem::path output_dir;
  // from-file scenario inputs
  std::optional<std::filesystem::path> input_trajectory;
  std::optional<std::filesystem::path> input_model;

  /// Throws ConfigInvalid when the invariants do not hold.
  void validate() const;
};

/// Load a config from a JSON file. Unknown keys are rejected. Keys not
/// present keep the defaults of ExperimentConfig.
ExperimentConfig config_from_json_file(const std::filesystem::path& path);

}  // namespace sqkf::bench
