#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"
#include "sqkf/bench/config.hpp"

namespace sqkf::bench {

/// Name of a per-trial output file, e.g. trial_007_sqkf_trace.csv.
std::string trial_filename(std::size_t trial, const std::string& suffix);

/// Run the configured experiment.
///
/// Per trial: simulate ground truth in double precision, run the
/// square-root filter and the conventional filter at the configured
/// working precision on identical (rounded) measurement streams, and run
/// the conventional filter in double as the oracle. Writes per-trial
/// trajectory/model/trace files plus summary.json into the output
/// directory and returns the summary. Filter failures are recorded in
/// the affected trial's summary; they never abort the batch. I/O
/// failures do abort, as IoError.
nlohmann::ordered_json run_experiment(const ExperimentConfig& config);

}  // namespace sqkf::bench
