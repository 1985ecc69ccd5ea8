#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sqkf::bench {

struct ColumnDeviation {
  std::string name;
  double max_abs = 0;
  double max_rel = 0;
  bool within = true;
};

struct ComparisonReport {
  std::size_t rows = 0;
  std::vector<ColumnDeviation> columns;
  bool within_tolerance = true;
};

/// Compare two CSV files cell by cell. The headers and row counts must
/// match (SchemaMismatch otherwise). A cell pair is within tolerance when
/// either its absolute or its relative deviation is <= tol; the report
/// carries per-column maxima of both.
ComparisonReport compare_traces(const std::filesystem::path& a,
                                const std::filesystem::path& b, double tol);

/// Human-readable rendering of the report, one line per column.
std::string format_report(const ComparisonReport& report);

}  // namespace sqkf::bench
