#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "misreport/oracle.hpp"

namespace misreport {

// One row of a pass/fail matrix.
struct CheckResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // largest deviation seen (meaning depends on the check)
  std::string detail;
  bool pass() const { return failures == 0; }
};

// Closed form of an instance: the restriction-aware single-instrument bounds,
// or the two-instrument bounds with tau = 0.
ProbBounds closed_form_bounds(const DiscreteInstance& inst);

// Oracle-versus-closed-form and witness checks on random instances of every
// configuration: equality within `tol` where the bounds are sharp, containment
// within `tol` elsewhere, exact witnesses at both endpoints.
std::vector<CheckResult> oracle_suite(std::size_t per_case, std::uint64_t seed, double tol = 0.02);

// Checks one user instance: testable implications of the closed form, oracle
// feasibility, and oracle agreement.
std::vector<CheckResult> verify_instance(const DiscreteInstance& inst,
                                         std::uint64_t budget = kDefaultOracleBudget);

// {"mode": "z_only" | "w_only" | "z_and_w", "n_z": .., "n_w": .., "step": ..,
//  "cells": [[p(z,w) row-major], ...], "restriction": {"kind": .., ...}}
DiscreteInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const DiscreteInstance& inst);

InstrumentMode parse_mode(const std::string& s);
std::string to_string(InstrumentMode m);
// kind: none | one_sided_alpha0 | one_sided_alpha1 | bounded | monotone_a0_le_a1 |
// monotone_a1_le_a0
Restriction parse_restriction(const std::string& kind, double a0_bar = 1.0, double a1_bar = 1.0);

}  // namespace misreport
