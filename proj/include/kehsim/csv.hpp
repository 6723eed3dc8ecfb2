#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace kehsim {

/// Shortest round-trippable-enough text for a double ("%.10g").
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated reader; no quoting. Lines starting with '#' are skipped.
CsvTable read_csv(const std::filesystem::path& path);

/// Throws ValidationError unless the file's header equals `expected` and every row
/// has the same number of columns.
void validate_csv(const std::filesystem::path& path, const std::vector<std::string>& expected);

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& value);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  void end_row();

private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_ = 0;
  std::size_t pending_ = 0;
};

} // namespace kehsim
