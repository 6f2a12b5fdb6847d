#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace qsa {

/// Formats a double with 15 significant digits; NaN becomes an empty field.
std::string format_number(double v);

/// CSV writer: a "# qsa-csv v1 <kind>" line, one header row, then data rows.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& kind, std::vector<std::string> columns);

  void row(const std::vector<double>& values);
  /// Row of preformatted fields.
  void row_fields(const std::vector<std::string>& fields);

  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::ofstream out_;
  std::string path_;
  std::vector<std::string> columns_;
};

struct CsvTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace qsa
