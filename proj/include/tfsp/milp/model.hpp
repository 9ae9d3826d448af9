#pragma once

#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace tfsp::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { kBinary, kContinuous };
enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct Variable {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  double lower = 0.0;
  double upper = kInfinity;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

// Solver-agnostic mixed-binary linear model. The objective is always
// minimized. Variables and constraints are addressed by dense index in
// insertion order; names must be unique within each family.
class MilpModel {
 public:
  int add_variable(std::string name, VarKind kind, double lower, double upper, double objective = 0.0);
  int add_binary(std::string name, double objective = 0.0) {
    return add_variable(std::move(name), VarKind::kBinary, 0.0, 1.0, objective);
  }
  int add_continuous(std::string name, double lower, double upper, double objective = 0.0) {
    return add_variable(std::move(name), VarKind::kContinuous, lower, upper, objective);
  }
  int add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);

  void set_objective(int var, double coef);
  void set_bounds(int var, double lower, double upper);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  int num_binaries() const;
  const Variable& variable(int j) const { return variables_[j]; }
  const Constraint& constraint(int i) const { return constraints_[i]; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }

  std::optional<int> find_variable(const std::string& name) const;
  std::optional<int> find_constraint(const std::string& name) const;

  double objective_value(const std::vector<double>& values) const;

  // Throws InvalidInput on duplicate names, dangling term references,
  // crossed or NaN bounds, or binaries with bounds outside [0, 1].
  void validate() const;

 private:
  std::vector<Variable> variables_;
  std::vector<double> objective_;
  std::vector<Constraint> constraints_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

std::string to_string(Sense sense);

}  // namespace tfsp::milp
