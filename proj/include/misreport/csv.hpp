#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "misreport/data.hpp"

namespace misreport {

// Header plus string cells, row-major.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws DataError
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Maps CSV column names onto the roles of a Sample.
struct ColumnRoles {
  std::string y = "y";
  std::vector<std::string> x;
  std::optional<std::string> z;
  std::optional<std::string> w;
  std::optional<std::vector<double>> w_order;
};

Sample sample_from_csv(const CsvTable& table, const ColumnRoles& roles);

// Shortest-safe decimal text for a double: 17 significant digits, so that
// parse_double(format_double(v)) == v bit for bit.
std::string format_double(double v);
double parse_double(const std::string& s);

std::string csv_escape(const std::string& s);

}  // namespace misreport
