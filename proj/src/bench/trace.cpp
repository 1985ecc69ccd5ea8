#include "sqkf/bench/trace.hpp"

#include <fstream>
#include <string>

#include "sqkf/errors.hpp"
#include "sqkf/trajectory_io.hpp"

namespace sqkf::bench {

void write_trace_csv(const std::filesystem::path& path,
                     const FilterTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  out << "step";
  for (std::size_t i = 0; i < trace.state_dim; ++i) out << ",mean_" << i;
  out << ",min_eig,cov_norm,mse,innovation_norm,covariance_indefinite,"
         "solve_failure\n";
  for (const TraceRow& row : trace.rows) {
    out << row.step;
    for (double v : row.mean) out << "," << detail::format_double(v);
    out << "," << detail::format_double(row.min_eigenvalue) << ","
        << detail::format_double(row.covariance_norm) << ","
        << detail::format_double(row.mse) << ","
        << detail::format_double(row.innovation_norm) << ","
        << (row.covariance_indefinite ? 1 : 0) << ","
        << (row.solve_failure ? 1 : 0) << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

FilterTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");

  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaMismatch(path.string() + ": missing header row");
  }
  const auto header = detail::split_csv_line(line);
  if (header.size() < 7 || header[0] != "step") {
    throw SchemaMismatch(path.string() + ": not a trace file");
  }
  std::size_t n = 0;
  while (1 + n < header.size() &&
         header[1 + n].rfind("mean_", 0) == 0) {
    ++n;
  }
  const std::vector<std::string> tail = {
      "min_eig",         "cov_norm",
      "mse",             "innovation_norm",
      "covariance_indefinite", "solve_failure"};
  if (header.size() != 1 + n + tail.size()) {
    throw SchemaMismatch(path.string() + ": unexpected column count");
  }
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (header[1 + n + i] != tail[i]) {
      throw SchemaMismatch(path.string() + ": unexpected column '" +
                           header[1 + n + i] + "'");
    }
  }

  FilterTrace trace;
  trace.state_dim = n;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw SchemaMismatch(path.string() + ": ragged row");
    }
    TraceRow row;
    row.step = static_cast<std::size_t>(
        detail::parse_double(cells[0], "trace step"));
    row.mean.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      row.mean[i] = detail::parse_double(cells[1 + i], "trace mean");
    row.min_eigenvalue = detail::parse_double(cells[1 + n], "trace min_eig");
    row.covariance_norm =
        detail::parse_double(cells[2 + n], "trace cov_norm");
    row.mse = detail::parse_double(cells[3 + n], "trace mse");
    row.innovation_norm =
        detail::parse_double(cells[4 + n], "trace innovation_norm");
    row.covariance_indefinite =
        detail::parse_double(cells[5 + n], "trace flag") != 0.0;
    row.solve_failure =
        detail::parse_double(cells[6 + n], "trace flag") != 0.0;
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

}  // namespace sqkf::bench
