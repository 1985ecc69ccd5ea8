#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace sqkf::bench {

/// One per-step record of a filter's health. All numeric fields are
/// stored in double; means produced at single precision are widened
/// exactly. Eigenvalue-derived fields always come from a double-precision
/// computation on the implied covariance.
struct TraceRow {
  std::size_t step = 0;  // time index of the estimate (1-based)
  std::vector<double> mean;
  double min_eigenvalue = 0;
  double covariance_norm = 0;  // largest |eigenvalue|
  double mse = 0;              // mean squared error vs ground truth
  double innovation_norm = 0;
  bool covariance_indefinite = false;
  bool solve_failure = false;
};

struct FilterTrace {
  std::size_t state_dim = 0;
  std::vector<TraceRow> rows;
};

/// CSV with header
///   step,mean_0..mean_{n-1},min_eig,cov_norm,mse,innovation_norm,
///   covariance_indefinite,solve_failure
/// one row per step, numbers in shortest round-trip decimal form.
void write_trace_csv(const std::filesystem::path& path,
                     const FilterTrace& trace);

FilterTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace sqkf::bench
