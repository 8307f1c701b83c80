#include "eegbench/csv.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "eegbench/errors.hpp"

namespace eegbench {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw FormatError(source.string() + ": missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  CsvTable t;
  t.source = path;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file, expected a header line");
  t.header = split_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != t.header.size())
      throw FormatError(path.string() + ": line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                        " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

double parse_real(const std::string& field, const std::filesystem::path& source) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw FormatError(source.string() + ": '" + field + "' is not a number");
}

}  // namespace eegbench
