#pragma once

#include "vrql/algorithms.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace vrql {

/// Parses a trace CSV. Throws ValidationError on a wrong header or bad rows.
std::vector<RunTrace> read_trace_csv(std::istream& in);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolation quantiles of a nonempty sample.
Quartiles quartiles(std::vector<double> values);

/// Samples at the first record with error <= epsilon, if any.
std::optional<std::uint64_t> samples_to_epsilon(const RunTrace& trace, double epsilon);

/// True when every epoch_end record of epoch m >= 1 satisfies
/// error <= initial_error / 2^m. Empty when the trace has no such records.
std::optional<bool> meets_epoch_halving(const RunTrace& trace);

/// Per (algorithm, gamma): samples-to-epsilon quartiles with a reached /
/// unreached count, the fraction of trials meeting per-epoch halving, and
/// final-error quartiles.
nlohmann::json summarize_traces(const std::vector<RunTrace>& traces, double epsilon);

nlohmann::json summarize_csv(const std::filesystem::path& csv_path, double epsilon);

}  // namespace vrql
