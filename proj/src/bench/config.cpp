#include "sqkf/bench/config.hpp"

#include <fstream>

#include "json.hpp"
#include "sqkf/errors.hpp"

namespace sqkf::bench {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kRandom: return "random";
    case Scenario::kIllConditioned: return "ill-conditioned";
    case Scenario::kFromFile: return "from-file";
  }
  return "?";
}

std::string to_string(Precision p) {
  return p == Precision::kSingle ? "single" : "double";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "random") return Scenario::kRandom;
  if (s == "ill-conditioned" || s == "ill_conditioned")
    return Scenario::kIllConditioned;
  if (s == "from-file" || s == "from_file") return Scenario::kFromFile;
  throw ConfigInvalid("unknown scenario '" + s + "'");
}

Precision precision_from_string(const std::string& s) {
  if (s == "single") return Precision::kSingle;
  if (s == "double") return Precision::kDouble;
  throw ConfigInvalid("unknown precision '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigInvalid("trials must be >= 1");
  if (steps < 1) throw ConfigInvalid("steps must be >= 1");
  if (scenario == Scenario::kIllConditioned) {
    if (!epsilon) {
      throw ConfigInvalid("ill-conditioned scenario requires epsilon");
    }
    if (!(*epsilon > 0.0) || !(*epsilon < 1.0)) {
      throw ConfigInvalid("epsilon must be in (0, 1)");
    }
  } else if (epsilon) {
    throw ConfigInvalid("epsilon is only valid for the ill-conditioned scenario");
  }
  if (scenario == Scenario::kRandom) {
    if (state_dim < 1 || measurement_dim < 1) {
      throw ConfigInvalid("random scenario requires n >= 1 and m >= 1");
    }
  }
  if (scenario == Scenario::kFromFile) {
    if (!input_trajectory || !input_model) {
      throw ConfigInvalid(
          "from-file scenario requires an input trajectory and a model file");
    }
  }
  if (output_dir.empty()) throw ConfigInvalid("output directory is required");
}

ExperimentConfig config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid("config file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigInvalid("config file must hold a JSON object");

  ExperimentConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "scenario") {
        cfg.scenario = scenario_from_string(value.get<std::string>());
      } else if (key == "n") {
        cfg.state_dim = value.get<std::size_t>();
      } else if (key == "m") {
        cfg.measurement_dim = value.get<std::size_t>();
      } else if (key == "p") {
        cfg.control_dim = value.get<std::size_t>();
      } else if (key == "steps") {
        cfg.steps = value.get<std::size_t>();
      } else if (key == "trials") {
        cfg.trials = value.get<std::size_t>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "precision") {
        cfg.precision = precision_from_string(value.get<std::string>());
      } else if (key == "epsilon") {
        cfg.epsilon = value.get<double>();
      } else if (key == "out") {
        cfg.output_dir = value.get<std::string>();
      } else if (key == "input") {
        cfg.input_trajectory = std::filesystem::path(value.get<std::string>());
      } else if (key == "model") {
        cfg.input_model = std::filesystem::path(value.get<std::string>());
      } else {
        throw ConfigInvalid("config file: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid("config file " + path.string() + ": " + e.what());
  }
  return cfg;
}

}  // namespace sqkf::bench
