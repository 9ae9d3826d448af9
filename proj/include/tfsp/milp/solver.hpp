#pragma once

#include <limits>
#include <string>
#include <vector>

#include "tfsp/milp/model.hpp"
#include "tfsp/milp/simplex.hpp"

namespace tfsp::milp {

inline constexpr double kIntegralityTol = 1e-6;
inline constexpr double kFeasibilityTol = 1e-6;

struct SolveLimits {
  double time_seconds = std::numeric_limits<double>::infinity();
  // Absolute optimality gap. A node is pruned once its bound is within this
  // distance of the incumbent.
  double gap = 1e-6;
  // Optional relative gap (e.g. 0.005); the larger of the two tolerances wins.
  double relative_gap = 0.0;
  long node_limit = 1'000'000;
  bool record_trace = false;
};

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kUnbounded, kLimit };

struct NodeRecord {
  long node = 0;
  double global_bound = 0.0;  // lowest open bound when the node was selected
  double lp_bound = 0.0;      // LP value at the node (+inf if infeasible)
  double incumbent = 0.0;     // incumbent before processing the node
};

struct MilpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> values;
  double objective = std::numeric_limits<double>::infinity();
  double best_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double root_bound = -std::numeric_limits<double>::infinity();
  long nodes = 0;
  long lp_iterations = 0;
  double wall_seconds = 0.0;
  std::vector<NodeRecord> trace;

  bool has_values() const { return status == SolveStatus::kOptimal || status == SolveStatus::kFeasible ||
                                   (status == SolveStatus::kLimit && !values.empty()); }
};

// Best-first branch-and-bound over the binary variables. Each node solves the
// LP relaxation from scratch; branching picks the most fractional binary with
// ties broken by lowest index. The root LP is rounded once to seed an
// incumbent. Deterministic for identical model and limits (barring a time
// limit cutting the search).
MilpSolution solve(const MilpModel& model, const SolveLimits& limits = {});

const char* to_string(SolveStatus status);

}  // namespace tfsp::milp
