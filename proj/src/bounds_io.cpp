#include "misreport/bounds_io.hpp"

#include <ostream>

#include "misreport/csv.hpp"
#include "misreport/errors.hpp"

namespace misreport {

namespace {

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace

void write_bounds_csv(std::ostream& out, const ProbBounds& b, const Binning* binning) {
  out << "cell,covariate_ranges,z,w,p,lower,upper,defined,method,flags,binding_lower,"
         "binding_upper\n";
  for (const auto& r : b.rows) {
    out << r.cell << ',' << csv_escape(binning ? binning->describe_cell(r.cell) : "") << ','
        << opt_num(r.z_value) << ',' << opt_num(r.w_value) << ',' << format_double(r.p) << ','
        << format_double(r.lower) << ',' << format_double(r.upper) << ','
        << (r.defined ? 1 : 0) << ',' << csv_escape(b.method) << ','
        << csv_escape(flags_to_string(r.flags)) << ',' << csv_escape(r.binding_lower) << ','
        << csv_escape(r.binding_upper) << '\n';
  }
}

ProbBounds read_bounds_csv(std::istream& in) {
  auto t = read_csv(in);
  ProbBounds b;
  const auto ic = t.column("cell"), iz = t.column("z"), iw = t.column("w"),
             ip = t.column("p"), il = t.column("lower"), iu = t.column("upper"),
             id = t.column("defined"), im = t.column("method"), iflags = t.column("flags"),
             ibl = t.column("binding_lower"), ibu = t.column("binding_upper");
  for (const auto& row : t.rows) {
    BoundRow r;
    r.cell = static_cast<std::size_t>(parse_double(row[ic]));
    r.z_value = parse_opt(row[iz]);
    r.w_value = parse_opt(row[iw]);
    r.p = parse_double(row[ip]);
    r.lower = parse_double(row[il]);
    r.upper = parse_double(row[iu]);
    r.defined = row[id] == "1";
    r.flags = flags_from_string(row[iflags]);
    r.binding_lower = row[ibl];
    r.binding_upper = row[ibu];
    if (b.method.empty()) b.method = row[im];
    b.rows.push_back(std::move(r));
  }
  return b;
}

nlohmann::json bounds_to_json(const ProbBounds& b, const Binning* binning) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : b.rows) {
    nlohmann::json j;
    j["cell"] = r.cell;
    if (binning) j["covariate_ranges"] = binning->describe_cell(r.cell);
    j["z"] = r.z_value ? nlohmann::json(*r.z_value) : nlohmann::json(nullptr);
    j["w"] = r.w_value ? nlohmann::json(*r.w_value) : nlohmann::json(nullptr);
    j["p"] = r.p;
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["defined"] = r.defined;
    j["flags"] = flags_to_string(r.flags);
    j["binding_lower"] = r.binding_lower;
    j["binding_upper"] = r.binding_upper;
    rows.push_back(std::move(j));
  }
  return {{"method", b.method}, {"rows", std::move(rows)}};
}

}  // namespace misreport
