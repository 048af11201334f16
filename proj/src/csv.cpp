#include "misreport/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "misreport/errors.hpp"

namespace misreport {

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
  out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("missing column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, line_no);
    for (auto& c : cells) c = trim(std::move(c));
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw DataError("empty CSV input");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in);
}

double parse_double(const std::string& s) {
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == ".")
    throw DataError("missing value");
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw DataError("not a number: '" + s + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Sample sample_from_csv(const CsvTable& t, const ColumnRoles& roles) {
  SampleColumns c;
  const std::size_t yi = t.column(roles.y);
  std::vector<std::size_t> xi;
  for (const auto& name : roles.x) xi.push_back(t.column(name));
  std::optional<std::size_t> zi, wi;
  if (roles.z) zi = t.column(*roles.z);
  if (roles.w) wi = t.column(*roles.w);
  c.x.assign(xi.size(), {});
  if (zi) c.z.emplace();
  if (wi) c.w.emplace();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    try {
      double y = parse_double(row[yi]);
      if (y != 0.0 && y != 1.0) throw DataError("non-binary outcome");
      c.y.push_back(static_cast<int>(y));
      for (std::size_t k = 0; k < xi.size(); ++k) c.x[k].push_back(parse_double(row[xi[k]]));
      if (zi) c.z->push_back(parse_double(row[*zi]));
      if (wi) c.w->push_back(parse_double(row[*wi]));
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  c.w_order = roles.w_order;
  c.covariate_names = roles.x;
  return build_sample(std::move(c));
}

}  // namespace misreport
