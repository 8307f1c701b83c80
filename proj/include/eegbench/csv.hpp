#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace eegbench {

// Round-trippable decimal form of a double (%.17g).
std::string format_real(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; FormatError naming the file when absent.
  std::size_t column(const std::string& name) const;
  std::filesystem::path source;
};

// Plain comma-separated values without quoting; the first line is the header.
CsvTable read_csv(const std::filesystem::path& path);
double parse_real(const std::string& field, const std::filesystem::path& source);

}  // namespace eegbench
