#include "tfsp/milp/model.hpp"

#include <cmath>
#include <unordered_set>

#include "tfsp/error.hpp"

namespace tfsp::milp {

int MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper, double objective) {
  if (var_index_.count(name)) throw InvalidInput("duplicate variable name " + name);
  const int j = num_variables();
  var_index_.emplace(name, j);
  variables_.push_back({std::move(name), kind, lower, upper});
  objective_.push_back(objective);
  return j;
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  if (row_index_.count(name)) throw InvalidInput("duplicate constraint name " + name);
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) throw InvalidInput("constraint " + name + " references unknown variable");
  }
  const int i = num_constraints();
  row_index_.emplace(name, i);
  constraints_.push_back({std::move(name), std::move(terms), sense, rhs});
  return i;
}

void MilpModel::set_objective(int var, double coef) { objective_.at(var) = coef; }

void MilpModel::set_bounds(int var, double lower, double upper) {
  auto& v = variables_.at(var);
  v.lower = lower;
  v.upper = upper;
}

int MilpModel::num_binaries() const {
  int n = 0;
  for (const auto& v : variables_) n += v.kind == VarKind::kBinary;
  return n;
}

std::optional<int> MilpModel::find_variable(const std::string& name) const {
  auto it = var_index_.find(name);
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> MilpModel::find_constraint(const std::string& name) const {
  auto it = row_index_.find(name);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

double MilpModel::objective_value(const std::vector<double>& values) const {
  double z = 0.0;
  for (int j = 0; j < num_variables(); ++j) z += objective_[j] * values.at(j);
  return z;
}

void MilpModel::validate() const {
  std::unordered_set<std::string> names;
  for (const auto& v : variables_) {
    if (v.name.empty()) throw InvalidInput("variable with empty name");
    if (!names.insert(v.name).second) throw InvalidInput("duplicate variable name " + v.name);
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw InvalidInput("variable " + v.name + " has invalid bounds");
    }
    if (v.kind == VarKind::kBinary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw InvalidInput("binary variable " + v.name + " has bounds outside [0, 1]");
    }
  }
  names.clear();
  for (const auto& c : constraints_) {
    if (c.name.empty()) throw InvalidInput("constraint with empty name");
    if (!names.insert(c.name).second) throw InvalidInput("duplicate constraint name " + c.name);
    if (!std::isfinite(c.rhs)) throw InvalidInput("constraint " + c.name + " has non-finite rhs");
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= num_variables()) throw InvalidInput("constraint " + c.name + " references unknown variable");
      if (!std::isfinite(t.coef)) throw InvalidInput("constraint " + c.name + " has non-finite coefficient");
    }
  }
  for (double c : objective_) {
    if (!std::isfinite(c)) throw InvalidInput("objective has non-finite coefficient");
  }
}

std::string to_string(Sense sense) {
  switch (sense) {
    case Sense::kLessEqual: return "<=";
    case Sense::kEqual: return "=";
    case Sense::kGreaterEqual: return ">=";
  }
  return "?";
}

}  // namespace tfsp::milp
