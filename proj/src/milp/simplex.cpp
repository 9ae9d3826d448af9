#include "tfsp/milp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tfsp/error.hpp"

namespace tfsp::milp {

namespace {

enum class VarState : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

using Entry = detail::ColumnEntry;

// One solve of the bounded-variable simplex. Column layout: structural
// [0, n), slack [n, n+m), artificial [n+m, n+2m).
class SimplexRun {
 public:
  SimplexRun(const std::vector<std::vector<Entry>>& columns, const std::vector<double>& rhs,
             std::vector<double> lower, std::vector<double> upper, const LpOptions& options)
      : columns_(columns),
        rhs_(rhs),
        options_(options),
        m_(static_cast<int>(rhs.size())),
        n_(static_cast<int>(columns.size())),
        total_(n_ + 2 * m_),
        lo_(std::move(lower)),
        up_(std::move(upper)),
        x_(total_, 0.0),
        state_(total_, VarState::kAtLower),
        art_sign_(m_, 1.0),
        basis_(m_, -1),
        binv_(static_cast<std::size_t>(m_) * m_, 0.0) {
    max_iterations_ = options_.max_iterations > 0 ? options_.max_iterations : 20 * (m_ + total_) + 10000;
  }

  LpStatus run(const std::vector<double>& structural_cost) {
    initial_basis();
    std::vector<double> phase1(total_, 0.0);
    for (int i = 0; i < m_; ++i) phase1[n_ + m_ + i] = 1.0;
    LpStatus st = iterate(phase1, /*allow_unbounded=*/false);
    if (st == LpStatus::kIterationLimit) return st;
    double infeasibility = 0.0;
    for (int i = 0; i < m_; ++i) infeasibility += x_[n_ + m_ + i];
    double scale = 1.0;
    for (double b : rhs_) scale = std::max(scale, std::abs(b));
    if (infeasibility > 1e-7 * scale) return LpStatus::kInfeasible;

    for (int i = 0; i < m_; ++i) {
      const int a = n_ + m_ + i;
      lo_[a] = up_[a] = 0.0;
      if (state_[a] != VarState::kBasic) {
        x_[a] = 0.0;
        state_[a] = VarState::kAtLower;
      }
    }
    drive_out_artificials();

    cost_.assign(total_, 0.0);
    std::copy(structural_cost.begin(), structural_cost.end(), cost_.begin());
    st = iterate(cost_, /*allow_unbounded=*/true);
    if (st != LpStatus::kOptimal) return st;
    refactor();
    return LpStatus::kOptimal;
  }

  int iterations() const { return iterations_; }
  double value(int j) const { return x_[j]; }
  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return up_[j]; }

  std::vector<double> duals() const { return compute_duals(cost_); }
  double reduced_cost(int j, const std::vector<double>& y) const { return reduced(j, y, cost_); }

 private:
  template <typename F>
  void for_each_entry(int j, F&& f) const {
    if (j < n_) {
      for (const auto& e : columns_[j]) f(e.row, e.value);
    } else if (j < n_ + m_) {
      f(j - n_, 1.0);
    } else {
      f(j - n_ - m_, art_sign_[j - n_ - m_]);
    }
  }

  double nonbasic_start(int j) const {
    if (std::isfinite(lo_[j])) return lo_[j];
    if (std::isfinite(up_[j])) return up_[j];
    return 0.0;
  }

  VarState nonbasic_state(int j) const {
    if (std::isfinite(lo_[j])) return VarState::kAtLower;
    if (std::isfinite(up_[j])) return VarState::kAtUpper;
    return VarState::kFree;
  }

  void initial_basis() {
    std::vector<double> residual = rhs_;
    for (int j = 0; j < n_; ++j) {
      x_[j] = nonbasic_start(j);
      state_[j] = nonbasic_state(j);
      if (x_[j] != 0.0) {
        for (const auto& e : columns_[j]) residual[e.row] -= e.value * x_[j];
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      const int a = n_ + m_ + i;
      const double r = residual[i];
      if (r >= lo_[s] && r <= up_[s]) {
        basis_[i] = s;
        state_[s] = VarState::kBasic;
        x_[s] = r;
        lo_[a] = up_[a] = 0.0;
        x_[a] = 0.0;
        state_[a] = VarState::kAtLower;
      } else {
        const double clamped = std::clamp(r, lo_[s], up_[s]);
        x_[s] = clamped;
        state_[s] = clamped == lo_[s] ? VarState::kAtLower : VarState::kAtUpper;
        const double excess = r - clamped;
        art_sign_[i] = excess >= 0.0 ? 1.0 : -1.0;
        basis_[i] = a;
        state_[a] = VarState::kBasic;
        x_[a] = std::abs(excess);
        lo_[a] = 0.0;
        up_[a] = kInfinity;
      }
    }
    // The starting basis is a signed identity.
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = basis_[i] >= n_ + m_ ? art_sign_[i] : 1.0;
    since_refactor_ = 0;
  }

  std::size_t idx(int i, int k) const { return static_cast<std::size_t>(i) * m_ + k; }

  void refactor() {
    // Gauss-Jordan with partial pivoting on [B | I].
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      for_each_entry(basis_[k], [&](int row, double v) { b[idx(row, k)] = v; });
    }
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(b[idx(col, col)]);
      for (int r = col + 1; r < m_; ++r) {
        const double v = std::abs(b[idx(r, col)]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-11) throw SolverError("numerically singular basis during refactorization");
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(b[idx(piv, k)], b[idx(col, k)]);
          std::swap(binv_[idx(piv, k)], binv_[idx(col, k)]);
        }
      }
      const double inv = 1.0 / b[idx(col, col)];
      for (int k = 0; k < m_; ++k) {
        b[idx(col, k)] *= inv;
        binv_[idx(col, k)] *= inv;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = b[idx(r, col)];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          b[idx(r, k)] -= f * b[idx(col, k)];
          binv_[idx(r, k)] -= f * binv_[idx(col, k)];
        }
      }
    }
    recompute_basic();
    since_refactor_ = 0;
  }

  void recompute_basic() {
    std::vector<double> r = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      for_each_entry(j, [&](int row, double v) { r[row] -= v * x_[j]; });
    }
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int k = 0; k < m_; ++k) s += binv_[idx(i, k)] * r[k];
      x_[basis_[i]] = s;
    }
  }

  std::vector<double> compute_duals(const std::vector<double>& cost) const {
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double c = cost[basis_[i]];
      if (c == 0.0) continue;
      for (int k = 0; k < m_; ++k) y[k] += c * binv_[idx(i, k)];
    }
    return y;
  }

  double reduced(int j, const std::vector<double>& y, const std::vector<double>& cost) const {
    double d = cost[j];
    for_each_entry(j, [&](int row, double v) { d -= y[row] * v; });
    return d;
  }

  std::vector<double> ftran(int j) const {
    std::vector<double> alpha(m_, 0.0);
    for_each_entry(j, [&](int row, double v) {
      for (int i = 0; i < m_; ++i) alpha[i] += binv_[idx(i, row)] * v;
    });
    return alpha;
  }

  void pivot(int r, const std::vector<double>& alpha) {
    const double pr = alpha[r];
    for (int k = 0; k < m_; ++k) binv_[idx(r, k)] /= pr;
    for (int i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      const double f = alpha[i];
      for (int k = 0; k < m_; ++k) binv_[idx(i, k)] -= f * binv_[idx(r, k)];
    }
    ++since_refactor_;
  }

  LpStatus iterate(const std::vector<double>& cost, bool allow_unbounded) {
    int degenerate_run = 0;
    bool bland = false;
    const double tol = options_.optimality_tol;
    while (true) {
      if (iterations_ >= max_iterations_) return LpStatus::kIterationLimit;
      if (since_refactor_ >= options_.refactor_interval) refactor();
      const std::vector<double> y = compute_duals(cost);

      int q = -1;
      double q_d = 0.0;
      double best = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::kBasic || lo_[j] == up_[j]) continue;
        const double d = reduced(j, y, cost);
        bool eligible = false;
        switch (state_[j]) {
          case VarState::kAtLower: eligible = d < -tol; break;
          case VarState::kAtUpper: eligible = d > tol; break;
          case VarState::kFree: eligible = std::abs(d) > tol; break;
          case VarState::kBasic: break;
        }
        if (!eligible) continue;
        if (bland) {
          q = j;
          q_d = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          q_d = d;
        }
      }
      if (q < 0) return LpStatus::kOptimal;

      const double dir = q_d < 0.0 ? 1.0 : -1.0;
      const std::vector<double> alpha = ftran(q);

      double theta = kInfinity;
      int leave = -1;  // -2 marks a bound flip of the entering variable
      bool leave_to_upper = false;
      double leave_pivot = 0.0;
      if (std::isfinite(lo_[q]) && std::isfinite(up_[q])) {
        theta = up_[q] - lo_[q];
        leave = -2;
      }
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[i];
        if (std::abs(a) <= options_.pivot_tol) continue;
        const double rate = -dir * a;
        const int b = basis_[i];
        double t;
        bool to_upper;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[b])) continue;
          t = std::max(0.0, x_[b] - lo_[b]) / -rate;
          to_upper = false;
        } else {
          if (!std::isfinite(up_[b])) continue;
          t = std::max(0.0, up_[b] - x_[b]) / rate;
          to_upper = true;
        }
        bool take = false;
        if (t < theta - 1e-12) {
          take = true;
        } else if (t <= theta + 1e-12 && leave >= 0) {
          take = bland ? b < basis_[leave] : std::abs(a) > std::abs(leave_pivot);
        }
        if (take) {
          theta = t;
          leave = i;
          leave_to_upper = to_upper;
          leave_pivot = a;
        }
      }
      if (leave == -1) {
        if (allow_unbounded) return LpStatus::kUnbounded;
        throw SolverError("phase one reported an unbounded direction");
      }

      ++iterations_;
      if (theta > 0.0 && std::isfinite(theta)) {
        x_[q] += dir * theta;
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] != 0.0) x_[basis_[i]] -= dir * theta * alpha[i];
        }
      }
      if (leave == -2) {
        x_[q] = dir > 0.0 ? up_[q] : lo_[q];
        state_[q] = dir > 0.0 ? VarState::kAtUpper : VarState::kAtLower;
      } else {
        const int b = basis_[leave];
        x_[b] = leave_to_upper ? up_[b] : lo_[b];
        state_[b] = leave_to_upper ? VarState::kAtUpper : VarState::kAtLower;
        basis_[leave] = q;
        state_[q] = VarState::kBasic;
        pivot(leave, alpha);
      }

      if (theta <= 1e-12) {
        if (++degenerate_run > options_.bland_after) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_ + m_) continue;
      int best_j = -1;
      double best = 1e-7;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        double rho = 0.0;
        for_each_entry(j, [&](int row, double v) { rho += binv_[idx(r, row)] * v; });
        if (std::abs(rho) > best) {
          best = std::abs(rho);
          best_j = j;
        }
      }
      if (best_j < 0) continue;  // redundant row; artificial stays basic at zero
      const std::vector<double> alpha = ftran(best_j);
      const int a = basis_[r];
      state_[a] = VarState::kAtLower;
      x_[a] = 0.0;
      basis_[r] = best_j;
      state_[best_j] = VarState::kBasic;
      pivot(r, alpha);
    }
    refactor();
  }

  const std::vector<std::vector<Entry>>& columns_;
  const std::vector<double>& rhs_;
  const LpOptions& options_;
  int m_;
  int n_;
  int total_;
  std::vector<double> lo_;
  std::vector<double> up_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<double> art_sign_;
  std::vector<int> basis_;
  std::vector<double> binv_;
  std::vector<double> cost_;
  int iterations_ = 0;
  int since_refactor_ = 0;
  int max_iterations_ = 0;
};

}  // namespace

LpSolver::LpSolver(const MilpModel& model, LpOptions options)
    : model_(&model),
      options_(options),
      rows_(model.num_constraints()),
      structural_(model.num_variables()),
      columns_(model.num_variables()),
      rhs_(model.num_constraints()),
      slack_lower_(model.num_constraints()),
      slack_upper_(model.num_constraints()),
      cost_(model.objective()) {
  for (int i = 0; i < rows_; ++i) {
    const auto& c = model.constraint(i);
    rhs_[i] = c.rhs;
    switch (c.sense) {
      case Sense::kLessEqual:
        slack_lower_[i] = 0.0;
        slack_upper_[i] = kInfinity;
        break;
      case Sense::kGreaterEqual:
        slack_lower_[i] = -kInfinity;
        slack_upper_[i] = 0.0;
        break;
      case Sense::kEqual:
        slack_lower_[i] = slack_upper_[i] = 0.0;
        break;
    }
    for (const auto& t : c.terms) {
      if (t.coef == 0.0) continue;
      auto& col = columns_[t.var];
      if (!col.empty() && col.back().row == i) {
        col.back().value += t.coef;
      } else {
        col.push_back({i, t.coef});
      }
    }
  }
}

LpResult LpSolver::solve() const {
  std::vector<double> lower(structural_);
  std::vector<double> upper(structural_);
  for (int j = 0; j < structural_; ++j) {
    lower[j] = model_->variable(j).lower;
    upper[j] = model_->variable(j).upper;
  }
  return solve(lower, upper);
}

LpResult LpSolver::solve(std::span<const double> lower, std::span<const double> upper) const {
  LpResult result;
  for (int j = 0; j < structural_; ++j) {
    if (lower[j] > upper[j]) return result;  // infeasible bounds
  }
  const int total = structural_ + 2 * rows_;
  std::vector<double> lo(total, 0.0);
  std::vector<double> up(total, 0.0);
  std::copy(lower.begin(), lower.end(), lo.begin());
  std::copy(upper.begin(), upper.end(), up.begin());
  std::copy(slack_lower_.begin(), slack_lower_.end(), lo.begin() + structural_);
  std::copy(slack_upper_.begin(), slack_upper_.end(), up.begin() + structural_);

  SimplexRun run(columns_, rhs_, std::move(lo), std::move(up), options_);
  result.status = run.run(cost_);
  result.iterations = run.iterations();
  if (result.status != LpStatus::kOptimal) return result;

  result.values.resize(structural_);
  const double tol = options_.feasibility_tol * 10.0;
  for (int j = 0; j < structural_; ++j) {
    double v = run.value(j);
    if (std::abs(v - lower[j]) <= tol) v = lower[j];
    if (std::abs(v - upper[j]) <= tol) v = upper[j];
    result.values[j] = v;
  }
  result.objective = model_->objective_value(result.values);
  result.row_duals = run.duals();
  result.reduced_costs.resize(structural_);
  for (int j = 0; j < structural_; ++j) result.reduced_costs[j] = run.reduced_cost(j, result.row_duals);
  return result;
}

LpResult solve_lp(const MilpModel& model, const LpOptions& options) { return LpSolver(model, options).solve(); }

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration_limit";
  }
  return "?";
}

}  // namespace tfsp::milp
