#pragma once

#include <filesystem>

#include "sqkf/filter.hpp"

namespace sqkf::bench {

/// Serialize a model to JSON (matrices as row-major nested arrays, the
/// control map as null when absent).
void write_model_json(const std::filesystem::path& path,
                      const SystemModel<double>& model);

SystemModel<double> read_model_json(const std::filesystem::path& path);

}  // namespace sqkf::bench
