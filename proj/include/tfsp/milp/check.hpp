#pragma once

#include <map>
#include <string>
#include <vector>

#include "tfsp/milp/model.hpp"

namespace tfsp::milp {

enum class ViolationKind { kRow, kBound, kIntegrality };

struct Violation {
  ViolationKind kind;
  std::string name;  // constraint or variable name
  double amount;     // how far outside the allowed region
};

struct ViolationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  std::string summary() const;
};

// Row activity is compared against rhs with tolerance tol scaled by
// max(1, |rhs|, max |a_j x_j|) so rows with big-M coefficients are judged
// relative to their magnitude. Bounds and integrality use tol directly.
ViolationReport check_solution(const MilpModel& model, const std::vector<double>& values, double tol = 1e-6);
// Throws InvalidInput if a variable has no value.
ViolationReport check_solution(const MilpModel& model, const std::map<std::string, double>& values,
                               double tol = 1e-6);

std::vector<double> values_from_map(const MilpModel& model, const std::map<std::string, double>& values);
std::map<std::string, double> values_to_map(const MilpModel& model, const std::vector<double>& values);

const char* to_string(ViolationKind kind);

}  // namespace tfsp::milp
