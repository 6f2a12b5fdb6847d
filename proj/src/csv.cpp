#include "qsa/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qsa/error.hpp"

namespace qsa {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& kind, std::vector<std::string> columns)
    : out_(path), path_(path), columns_(std::move(columns)) {
  if (!out_) throw Error(ErrorKind::InvalidConfig, "cannot open '" + path + "' for writing");
  out_ << "# qsa-csv v1 " << kind << '\n';
  row_fields(columns_);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(format_number(v));
  row_fields(fields);
}

void CsvWriter::row_fields(const std::vector<std::string>& fields) {
  if (fields.size() != columns_.size())
    throw Error(ErrorKind::InvalidConfig, "row width does not match the header of '" + path_ + "'");
  for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
  out_ << '\n';
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    if (line.rfind("# qsa-csv v1 ", 0) == 0) {
      t.kind = line.substr(13);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) t.columns = split(line);
    else t.rows.push_back(split(line));
  }
  return t;
}

}  // namespace qsa
