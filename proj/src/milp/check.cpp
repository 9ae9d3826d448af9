#include "tfsp/milp/check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tfsp/error.hpp"

namespace tfsp::milp {

std::string ViolationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) os << to_string(v.kind) << ' ' << v.name << " by " << v.amount << '\n';
  return os.str();
}

ViolationReport check_solution(const MilpModel& model, const std::vector<double>& values, double tol) {
  if (static_cast<int>(values.size()) != model.num_variables()) {
    throw InvalidInput("solution has " + std::to_string(values.size()) + " values for " +
                       std::to_string(model.num_variables()) + " variables");
  }
  ViolationReport report;
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& var = model.variable(j);
    const double x = values[j];
    if (!std::isfinite(x)) {
      report.violations.push_back({ViolationKind::kBound, var.name, kInfinity});
      continue;
    }
    const double out = std::max(var.lower - x, x - var.upper);
    if (out > tol) report.violations.push_back({ViolationKind::kBound, var.name, out});
    if (var.kind == VarKind::kBinary) {
      const double frac = std::abs(x - std::round(x));
      if (frac > tol) report.violations.push_back({ViolationKind::kIntegrality, var.name, frac});
    }
  }
  for (const auto& row : model.constraints()) {
    double activity = 0.0;
    double scale = std::max(1.0, std::abs(row.rhs));
    for (const auto& t : row.terms) {
      const double term = t.coef * values[t.var];
      activity += term;
      scale = std::max(scale, std::abs(term));
    }
    double out = 0.0;
    switch (row.sense) {
      case Sense::kLessEqual: out = activity - row.rhs; break;
      case Sense::kGreaterEqual: out = row.rhs - activity; break;
      case Sense::kEqual: out = std::abs(activity - row.rhs); break;
    }
    if (!(out <= tol * scale)) report.violations.push_back({ViolationKind::kRow, row.name, out});
  }
  return report;
}

ViolationReport check_solution(const MilpModel& model, const std::map<std::string, double>& values, double tol) {
  return check_solution(model, values_from_map(model, values), tol);
}

std::vector<double> values_from_map(const MilpModel& model, const std::map<std::string, double>& values) {
  std::vector<double> out(model.num_variables());
  for (int j = 0; j < model.num_variables(); ++j) {
    auto it = values.find(model.variable(j).name);
    if (it == values.end()) throw InvalidInput("missing value for variable " + model.variable(j).name);
    out[j] = it->second;
  }
  return out;
}

std::map<std::string, double> values_to_map(const MilpModel& model, const std::vector<double>& values) {
  std::map<std::string, double> out;
  for (int j = 0; j < model.num_variables(); ++j) out.emplace(model.variable(j).name, values.at(j));
  return out;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kRow: return "row";
    case ViolationKind::kBound: return "bound";
    case ViolationKind::kIntegrality: return "integrality";
  }
  return "?";
}

}  // namespace tfsp::milp
