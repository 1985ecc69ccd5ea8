#include "sqkf/bench/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sqkf/errors.hpp"
#include "sqkf/trajectory_io.hpp"

namespace sqkf::bench {

namespace {

struct CsvGrid {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvGrid read_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  CsvGrid grid;
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaMismatch(path.string() + ": missing header row");
  }
  grid.header = detail::split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != grid.header.size()) {
      throw SchemaMismatch(path.string() + ": ragged row");
    }
    grid.rows.push_back(std::move(cells));
  }
  return grid;
}

}  // namespace

ComparisonReport compare_traces(const std::filesystem::path& a,
                                const std::filesystem::path& b, double tol) {
  const CsvGrid ga = read_grid(a);
  const CsvGrid gb = read_grid(b);
  if (ga.header != gb.header) {
    throw SchemaMismatch("column headers differ between " + a.string() +
                         " and " + b.string());
  }
  if (ga.rows.size() != gb.rows.size()) {
    throw SchemaMismatch("row counts differ: " +
                         std::to_string(ga.rows.size()) + " vs " +
                         std::to_string(gb.rows.size()));
  }

  ComparisonReport report;
  report.rows = ga.rows.size();
  report.columns.resize(ga.header.size());
  for (std::size_t c = 0; c < ga.header.size(); ++c) {
    report.columns[c].name = ga.header[c];
  }

  for (std::size_t r = 0; r < ga.rows.size(); ++r) {
    for (std::size_t c = 0; c < ga.header.size(); ++c) {
      const std::string& sa = ga.rows[r][c];
      const std::string& sb = gb.rows[r][c];
      if (sa.empty() != sb.empty()) {
        throw SchemaMismatch("cell presence differs at row " +
                             std::to_string(r) + ", column " +
                             ga.header[c]);
      }
      if (sa.empty()) continue;
      const double va = detail::parse_double(sa, "compare");
      const double vb = detail::parse_double(sb, "compare");
      const double abs_dev = std::abs(va - vb);
      const double denom = std::max(std::abs(va), std::abs(vb));
      const double rel_dev = denom > 0 ? abs_dev / denom : 0.0;
      ColumnDeviation& col = report.columns[c];
      col.max_abs = std::max(col.max_abs, abs_dev);
      col.max_rel = std::max(col.max_rel, rel_dev);
      if (!(abs_dev <= tol || rel_dev <= tol)) {
        col.within = false;
        report.within_tolerance = false;
      }
    }
  }
  return report;
}

std::string format_report(const ComparisonReport& report) {
  std::ostringstream out;
  out << "rows compared: " << report.rows << "\n";
  for (const ColumnDeviation& col : report.columns) {
    out << "  " << col.name << ": max_abs=" << col.max_abs
        << " max_rel=" << col.max_rel
        << (col.within ? "" : "  [over tolerance]") << "\n";
  }
  out << (report.within_tolerance ? "within tolerance" : "OVER TOLERANCE")
      << "\n";
  return out.str();
}

}  // namespace sqkf::bench
