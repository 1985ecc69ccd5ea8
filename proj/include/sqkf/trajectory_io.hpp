#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sqkf/errors.hpp"
#include "sqkf/sim.hpp"

namespace sqkf {

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const char* context) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw SchemaMismatch(std::string(context) + ": bad numeric cell '" +
                         std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

/// Write a trajectory as CSV with columns t, x_0..x_{n-1}, u_0..u_{p-1},
/// y_0..y_{m-1}; one row per time index 0..T. Row t carries the state at
/// time t, the control issued at time t (empty in the final row) and the
/// measurement taken at time t (empty in row 0). Values use shortest
/// round-trip decimal form.
inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const Trajectory<double>& traj) {
  const std::size_t total = traj.steps();
  const std::size_t n = traj.states.empty() ? 0 : traj.states[0].size();
  const std::size_t p = traj.controls.empty() ? 0 : traj.controls[0].size();
  const std::size_t m =
      traj.measurements.empty() ? 0 : traj.measurements[0].size();

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  for (std::size_t i = 0; i < p; ++i) out << ",u_" << i;
  for (std::size_t i = 0; i < m; ++i) out << ",y_" << i;
  out << "\n";

  for (std::size_t t = 0; t <= total; ++t) {
    out << t;
    for (std::size_t i = 0; i < n; ++i)
      out << "," << detail::format_double(traj.states[t][i]);
    for (std::size_t i = 0; i < p; ++i) {
      out << ",";
      if (t < total) out << detail::format_double(traj.controls[t][i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      out << ",";
      if (t >= 1) out << detail::format_double(traj.measurements[t - 1][i]);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

/// Inverse of write_trajectory_csv.
inline Trajectory<double> read_trajectory_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");

  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaMismatch(path.string() + ": missing header row");
  }
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "t") {
    throw SchemaMismatch(path.string() + ": first column must be 't'");
  }
  std::size_t n = 0, p = 0, m = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string& h = header[i];
    if (h.rfind("x_", 0) == 0 && p == 0 && m == 0) {
      ++n;
    } else if (h.rfind("u_", 0) == 0 && m == 0) {
      ++p;
    } else if (h.rfind("y_", 0) == 0) {
      ++m;
    } else {
      throw SchemaMismatch(path.string() + ": unexpected column '" + h + "'");
    }
  }
  if (n == 0 || m == 0) {
    throw SchemaMismatch(path.string() + ": need x_* and y_* columns");
  }

  Trajectory<double> traj;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw SchemaMismatch(path.string() + ": row " + std::to_string(row) +
                           " has " + std::to_string(cells.size()) +
                           " cells, header has " +
                           std::to_string(header.size()));
    }
    if (static_cast<std::size_t>(
            detail::parse_double(cells[0], "time index")) != row) {
      throw SchemaMismatch(path.string() + ": time index out of order at row " +
                           std::to_string(row));
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = detail::parse_double(cells[1 + i], "state");
    traj.states.push_back(std::move(x));

    const bool has_control = p > 0 && !cells[1 + n].empty();
    if (has_control) {
      if (row != traj.controls.size()) {
        throw SchemaMismatch(path.string() + ": control gap before row " +
                             std::to_string(row));
      }
      std::vector<double> u(p);
      for (std::size_t i = 0; i < p; ++i)
        u[i] = detail::parse_double(cells[1 + n + i], "control");
      traj.controls.push_back(std::move(u));
    }
    const bool has_measurement = !cells[1 + n + p].empty();
    if (row == 0 && has_measurement) {
      throw SchemaMismatch(path.string() + ": row 0 must not carry a measurement");
    }
    if (row >= 1) {
      if (!has_measurement) {
        throw SchemaMismatch(path.string() + ": missing measurement at row " +
                             std::to_string(row));
      }
      std::vector<double> y(m);
      for (std::size_t i = 0; i < m; ++i)
        y[i] = detail::parse_double(cells[1 + n + p + i], "measurement");
      traj.measurements.push_back(std::move(y));
    }
    ++row;
  }
  const std::size_t total = traj.measurements.size();
  if (total < 1 || traj.states.size() != total + 1) {
    throw SchemaMismatch(path.string() + ": inconsistent row structure");
  }
  if (p > 0 && traj.controls.size() != total) {
    throw SchemaMismatch(path.string() + ": control rows do not cover steps");
  }
  if (p == 0) {
    traj.controls.assign(total, std::vector<double>{});
  }
  return traj;
}

}  // namespace sqkf
