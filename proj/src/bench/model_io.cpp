#include "sqkf/bench/model_io.hpp"

#include <fstream>

#include "json.hpp"
#include "sqkf/errors.hpp"
#include "sqkf/matrix.hpp"
#include "sqkf/triangular.hpp"

namespace sqkf::bench {

namespace {

nlohmann::ordered_json matrix_to_json(const Matrix<double>& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix<double> matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw SchemaMismatch(std::string("model json: ") + name +
                         " must be a nonempty 2-d array");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix<double> m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw SchemaMismatch(std::string("model json: ragged rows in ") + name);
    }
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  if (!m.all_finite()) {
    throw SchemaMismatch(std::string("model json: nonfinite entries in ") +
                         name);
  }
  return m;
}

}  // namespace

void write_model_json(const std::filesystem::path& path,
                      const SystemModel<double>& model) {
  nlohmann::ordered_json j;
  j["state_dim"] = model.state_dim();
  j["measurement_dim"] = model.measurement_dim();
  j["control_dim"] = model.control_dim();
  j["dynamics"] = matrix_to_json(model.dynamics());
  j["control_map"] = model.control_map()
                         ? matrix_to_json(*model.control_map())
                         : nlohmann::ordered_json(nullptr);
  j["measurement_map"] = matrix_to_json(model.measurement_map());
  j["process_noise_factor"] =
      matrix_to_json(model.process_noise_factor().dense());
  j["measurement_noise_factor"] =
      matrix_to_json(model.measurement_noise_factor().dense());

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

SystemModel<double> read_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch("model json " + path.string() + ": " + e.what());
  }
  try {
    std::optional<Matrix<double>> control;
    if (j.contains("control_map") && !j["control_map"].is_null()) {
      control = matrix_from_json(j["control_map"], "control_map");
    }
    return SystemModel<double>(
        matrix_from_json(j.at("dynamics"), "dynamics"), std::move(control),
        matrix_from_json(j.at("measurement_map"), "measurement_map"),
        UpperTriangular<double>::from_matrix(
            matrix_from_json(j.at("process_noise_factor"),
                             "process_noise_factor")),
        UpperTriangular<double>::from_matrix(matrix_from_json(
            j.at("measurement_noise_factor"), "measurement_noise_factor")));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch("model json " + path.string() + ": " + e.what());
  }
}

}  // namespace sqkf::bench
