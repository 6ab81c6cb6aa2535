#include "icpgen/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "icpgen/errors.hpp"

namespace icpgen::csv {

std::string format_real(double value) {
  // std::to_chars emits the shortest representation that round-trips.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_real(*value) : std::string();
}

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  return line;
}

void write_matrix(std::ostream& out, const std::vector<std::string>& header, const Matrix& m) {
  if (!header.empty() && header.size() != m.cols() && m.rows() > 0) {
    throw DimensionError("csv::write_matrix: header width differs from column count");
  }
  out << join(header) << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_real(m(r, c));
    }
    out << '\n';
  }
}

void write_history(std::ostream& out, const MetricsHistory& history, bool include_seconds) {
  out << "epoch,matched_cost_sum,matched_cost_mean,emd,pmf_error,seconds\n";
  for (const auto& rec : history.records) {
    out << rec.epoch << ',' << format_real(rec.matched_cost_sum) << ','
        << format_real(rec.matched_cost_mean) << ',' << format_optional(rec.emd) << ','
        << format_optional(rec.pmf_error) << ','
        << (include_seconds ? format_real(rec.seconds) : std::string()) << '\n';
  }
}

void write_assignment(std::ostream& out, const Assignment& assignment) {
  out << "target_index,prediction_index,distance\n";
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out << i << ',' << assignment.permutation[i] << ','
        << format_real(assignment.per_pair_distance[i]) << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Table read(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw FormatError("csv: row " + std::to_string(table.rows.size() + 1) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

Matrix to_matrix(const Table& table) {
  Matrix m(table.rows.size(), table.header.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const std::string& cell = table.rows[r][c];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw FormatError("csv: non-numeric cell '" + cell + "' in column '" +
                          table.header[c] + "'");
      }
      m(r, c) = v;
    }
  }
  return m;
}

}  // namespace icpgen::csv
