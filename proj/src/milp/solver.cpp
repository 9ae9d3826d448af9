#include "tfsp/milp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "tfsp/error.hpp"

namespace tfsp::milp {

namespace {

struct Fixing {
  int var;
  double value;
};

struct OpenNode {
  double bound;
  long id;
  std::vector<Fixing> fixings;
};

struct WorseNode {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolveLimits& limits)
      : limits_(limits), lp_(model), lower_(model.num_variables()), upper_(model.num_variables()) {
    for (int j = 0; j < model.num_variables(); ++j) {
      lower_[j] = model.variable(j).lower;
      upper_[j] = model.variable(j).upper;
      if (model.variable(j).kind == VarKind::kBinary) {
        // Integral bounds only; a binary bounded inside (0, 1) has no 0/1 value.
        lower_[j] = std::ceil(lower_[j] - kIntegralityTol);
        upper_[j] = std::floor(upper_[j] + kIntegralityTol);
        binaries_.push_back(j);
      }
    }
  }

  MilpSolution run() {
    const auto start = std::chrono::steady_clock::now();
    MilpSolution out;

    LpResult root = solve_node({});
    if (root.status == LpStatus::kInfeasible) {
      out.status = SolveStatus::kInfeasible;
      return finish(out, start);
    }
    if (root.status == LpStatus::kUnbounded) {
      out.status = SolveStatus::kUnbounded;
      return finish(out, start);
    }
    out.root_bound = root.objective;
    if (limits_.record_trace) trace_.push_back({0, root.objective, root.objective, incumbent_obj_});

    const int branch_var = most_fractional(root.values);
    if (branch_var < 0) {
      accept(root.values);
    } else {
      accept(root.values);  // root rounding heuristic
      push_children(root.objective, {}, branch_var);
    }

    bool hit_limit = false;
    while (!open_.empty()) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed > limits_.time_seconds || nodes_ >= limits_.node_limit) {
        hit_limit = true;
        break;
      }
      OpenNode node = open_.top();
      open_.pop();
      if (prunable(node.bound)) {
        note_pruned(node.bound);
        continue;
      }
      const double global = node.bound;
      LpResult lp = solve_node(node.fixings);
      if (limits_.record_trace) {
        trace_.push_back({nodes_, global, lp.status == LpStatus::kOptimal ? lp.objective : kInfinity, incumbent_obj_});
      }
      if (lp.status != LpStatus::kOptimal) continue;
      if (prunable(lp.objective)) {
        note_pruned(lp.objective);
        continue;
      }
      const int var = most_fractional(lp.values);
      if (var < 0) {
        accept(lp.values);
        continue;
      }
      push_children(lp.objective, node.fixings, var);
    }

    double bound = std::min(incumbent_obj_, pruned_floor_);
    if (hit_limit && !open_.empty()) bound = std::min(bound, open_.top().bound);
    out.best_bound = bound;
    if (incumbent_.empty()) {
      out.status = hit_limit ? SolveStatus::kLimit : SolveStatus::kInfeasible;
      return finish(out, start);
    }
    out.values = incumbent_;
    out.objective = incumbent_obj_;
    out.gap = std::max(0.0, incumbent_obj_ - bound);
    out.status = hit_limit && out.gap > tolerance() ? SolveStatus::kLimit : SolveStatus::kOptimal;
    return finish(out, start);
  }

 private:
  MilpSolution& finish(MilpSolution& out, std::chrono::steady_clock::time_point start) {
    out.nodes = nodes_;
    out.lp_iterations = iterations_;
    out.trace = std::move(trace_);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  double tolerance() const {
    const double rel = std::isfinite(incumbent_obj_) ? limits_.relative_gap * std::abs(incumbent_obj_) : 0.0;
    return std::max(limits_.gap, rel);
  }

  bool prunable(double bound) const {
    return std::isfinite(incumbent_obj_) && bound >= incumbent_obj_ - tolerance();
  }

  void note_pruned(double bound) { pruned_floor_ = std::min(pruned_floor_, bound); }

  LpResult solve_node(const std::vector<Fixing>& fixings) {
    std::vector<double> lo = lower_;
    std::vector<double> up = upper_;
    for (const auto& f : fixings) lo[f.var] = up[f.var] = f.value;
    LpResult r = lp_.solve(lo, up);
    ++nodes_;
    iterations_ += r.iterations;
    if (r.status == LpStatus::kIterationLimit) throw SolverError("simplex iteration limit reached");
    return r;
  }

  int most_fractional(const std::vector<double>& values) const {
    int best = -1;
    double best_frac = kIntegralityTol;
    for (int j : binaries_) {
      const double v = values[j];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best_frac) {
        best_frac = frac;
        best = j;
      }
    }
    return best;
  }

  // Re-solves with every binary fixed to its rounded value so the stored
  // continuous part is consistent with exact 0/1 binaries.
  void accept(const std::vector<double>& values) {
    std::vector<Fixing> fix;
    fix.reserve(binaries_.size());
    for (int j : binaries_) fix.push_back({j, std::round(values[j])});
    LpResult r = solve_node(fix);
    if (r.status != LpStatus::kOptimal) return;
    if (r.objective < incumbent_obj_) {
      incumbent_obj_ = r.objective;
      incumbent_ = std::move(r.values);
    }
  }

  void push_children(double bound, const std::vector<Fixing>& parent, int var) {
    for (double v : {0.0, 1.0}) {
      if (v < lower_[var] || v > upper_[var]) continue;
      OpenNode child{bound, next_id_++, parent};
      child.fixings.push_back({var, v});
      open_.push(std::move(child));
    }
  }

  SolveLimits limits_;
  LpSolver lp_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> binaries_;
  std::priority_queue<OpenNode, std::vector<OpenNode>, WorseNode> open_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInfinity;
  double pruned_floor_ = kInfinity;
  long nodes_ = 0;
  long iterations_ = 0;
  long next_id_ = 1;
  std::vector<NodeRecord> trace_;
};

}  // namespace

MilpSolution solve(const MilpModel& model, const SolveLimits& limits) {
  model.validate();
  return BranchAndBound(model, limits).run();
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kLimit: return "limit";
  }
  return "?";
}

}  // namespace tfsp::milp
