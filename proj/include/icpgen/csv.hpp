#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "icpgen/matching.hpp"
#include "icpgen/matrix.hpp"
#include "icpgen/trainer.hpp"

namespace icpgen::csv {

// Shortest of %.17g; parses back to the identical double.
std::string format_real(double value);
std::string format_optional(const std::optional<double>& value);

std::string join(const std::vector<std::string>& fields);

// Header row followed by one row per matrix row.
void write_matrix(std::ostream& out, const std::vector<std::string>& header, const Matrix& m);

// epoch,matched_cost_sum,matched_cost_mean,emd,pmf_error,seconds. The
// seconds column is left empty unless include_seconds is set, so reruns of
// the same seed produce identical bytes.
void write_history(std::ostream& out, const MetricsHistory& history, bool include_seconds);

// target_index,prediction_index,distance
void write_assignment(std::ostream& out, const Assignment& assignment);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Plain comma-separated reader (no quoting), one header row.
Table read(std::istream& in);

// Numeric columns of a table; throws FormatError on non-numeric cells.
Matrix to_matrix(const Table& table);

}  // namespace icpgen::csv
