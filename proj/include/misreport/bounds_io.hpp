#pragma once

#include <iosfwd>

#include "json.hpp"
#include "misreport/bounds.hpp"

namespace misreport {

// One row per evaluation point: cell id, covariate ranges, z, w, p, L, U,
// defined, method, flags, binding terms. Numbers use 17 significant digits.
void write_bounds_csv(std::ostream& out, const ProbBounds& bounds, const Binning* binning);
ProbBounds read_bounds_csv(std::istream& in);

nlohmann::json bounds_to_json(const ProbBounds& bounds, const Binning* binning);

}  // namespace misreport
