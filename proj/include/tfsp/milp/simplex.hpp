#pragma once

#include <span>
#include <vector>

#include "tfsp/milp/model.hpp"

namespace tfsp::milp {

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_interval = 100;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 50;
  // 0 picks a limit proportional to the model size.
  int max_iterations = 0;
};

namespace detail {
struct ColumnEntry {
  int row;
  double value;
};
}  // namespace detail

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> values;         // one per model variable
  std::vector<double> row_duals;      // one per constraint, d(objective)/d(rhs)
  std::vector<double> reduced_costs;  // one per model variable
  int iterations = 0;
};

// Bounded-variable primal revised simplex over the continuous relaxation of
// a MilpModel (binary kinds are ignored; only bounds matter). Two phases with
// artificial variables, Dantzig pricing with Bland's rule after a run of
// degenerate pivots, dense explicit basis inverse rebuilt periodically.
//
// The standard form is built once, so branch-and-bound can re-solve the same
// model under different variable bounds.
class LpSolver {
 public:
  explicit LpSolver(const MilpModel& model, LpOptions options = {});

  LpResult solve() const;
  // Like solve() with the model's variable bounds replaced.
  LpResult solve(std::span<const double> lower, std::span<const double> upper) const;

  int num_rows() const { return rows_; }
  int num_structural() const { return structural_; }

 private:
  const MilpModel* model_;
  LpOptions options_;
  int rows_ = 0;
  int structural_ = 0;
  std::vector<std::vector<detail::ColumnEntry>> columns_;  // structural columns only
  std::vector<double> rhs_;
  std::vector<double> slack_lower_;
  std::vector<double> slack_upper_;
  std::vector<double> cost_;
};

LpResult solve_lp(const MilpModel& model, const LpOptions& options = {});

const char* to_string(LpStatus status);

}  // namespace tfsp::milp
