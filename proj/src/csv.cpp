#include "kehsim/csv.hpp"

#include "kehsim/common.hpp"
#include "kehsim/config.hpp"

#include <cstdio>

namespace kehsim {

std::string format_double(double v) {
  if (v == 0.0) return "0"; // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CSV file: " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw ValidationError(path.string() + ": empty CSV file");
  return table;
}

void validate_csv(const std::filesystem::path& path, const std::vector<std::string>& expected) {
  const CsvTable table = read_csv(path);
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw ValidationError(path.string() + ": header does not match schema '" + want + "'");
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    if (table.rows[r].size() != expected.size())
      throw ValidationError(path.string() + ": row " + std::to_string(r + 2) + " has " +
                            std::to_string(table.rows[r].size()) + " columns, expected " +
                            std::to_string(expected.size()));
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), path_(path), columns_(header.size()) {
  if (!out_) throw RuntimeError("cannot write CSV file: " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& value) {
  out_ << (pending_ ? "," : "") << value;
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
  if (pending_ != columns_)
    throw RuntimeError(path_.string() + ": row has " + std::to_string(pending_) + " cells, header has " +
                       std::to_string(columns_));
  out_ << '\n';
  pending_ = 0;
}

} // namespace kehsim
