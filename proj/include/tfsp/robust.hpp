#pragma once

// Budget uncertainty set, the robust counterpart of the eliminated-unmet
// model, and validators that check a robust solution against sampled and
// extreme demand deviations.
//
// Demand of flow f is u_f = mu_f + s_f zeta_f with |zeta|_inf <= 1 and
// |zeta|_1 <= Gamma, where s_f = min(sigma_f, mu_f) keeps realizations
// nonnegative.
//
// The counterpart is an approximation of the model with adaptive unmet
// demand: unmet is substituted by mu + s zeta - served, so the validator
// certifies feasibility of that substituted model, not optimality of the
// adaptive one.
//
// Auxiliary names: alpha, nu1(o,d,t), nu2, nu3(o,d,t;o',d',t'), nu4(o,d,t).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfsp/formulations.hpp"
#include "tfsp/ingest.hpp"
#include "tfsp/milp/solver.hpp"

namespace tfsp {

class BudgetUncertaintySet {
 public:
  // Support defaults to stats.support() (mean > 0). Throws InvalidInput for a
  // negative or non-finite gamma or a support flow without positive mean.
  BudgetUncertaintySet(FlowStats stats, double gamma, std::optional<std::vector<PassengerFlow>> support = {});

  const FlowStats& stats() const { return stats_; }
  double gamma() const { return gamma_; }
  const std::vector<PassengerFlow>& flows() const { return flows_; }
  std::size_t size() const { return flows_.size(); }
  double mu(std::size_t i) const { return mu_[i]; }
  double sigma(std::size_t i) const { return sigma_[i]; }  // clamped deviation
  std::map<PassengerFlow, double> mean_demand() const;

  bool contains(const std::vector<double>& zeta, double tol = 1e-9) const;
  // Demand realization mu + s zeta.
  std::map<PassengerFlow, double> realize(const std::vector<double>& zeta) const;

 private:
  FlowStats stats_;
  double gamma_;
  std::vector<PassengerFlow> flows_;
  std::vector<double> mu_, sigma_;
};

// max q^T z over |z|_inf <= rho, |z|_1 <= gamma (greedy on sorted |q|).
double budget_support(const std::vector<double>& q, double rho, double gamma);

// Extreme points of {|z|_inf <= 1, |z|_1 <= gamma}: floor(gamma) entries at
// +-1 and, for fractional gamma, one entry at +-frac. Throws InvalidInput if
// there would be more than `cap` of them.
std::vector<std::vector<double>> budget_extreme_points(std::size_t n, double gamma, std::size_t cap = 2'000'000);
std::size_t budget_extreme_point_count(std::size_t n, double gamma);

struct RobustOptions {
  std::size_t solve_cap = 60;          // largest support the embedded solver accepts
  std::size_t materialize_cap = 1000;  // above this only counts are produced
};

struct RobustAuxiliaries {
  int alpha = -1;
  std::vector<int> nu1;               // per support flow
  int nu2 = -1;
  std::map<std::pair<int, int>, int> nu3;  // (f, f') -> var
  std::vector<int> nu4;               // per support flow
};

struct RobustCounterpartModel {
  BudgetUncertaintySet uset;
  BuiltModel built;  // only meaningful when materialized
  RobustAuxiliaries aux;
  bool materialized = false;
  std::size_t aux_count = 0;   // nu variables: |F|^2 + 2|F| + 1 (alpha is part of the base model)
  std::size_t added_rows = 0;  // |F|^2 + 2|F|
  std::vector<std::vector<int>> served;  // per support flow: indices into built.index.lambdas
};

std::size_t robust_aux_count(std::size_t flows);
std::size_t robust_added_rows(std::size_t flows);

RobustCounterpartModel build_robust_counterpart(const TransitInstance& instance, const BudgetUncertaintySet& uset,
                                                const ModelParams& params, const RobustOptions& options = {});

// Throws SolverError when the model was not materialized or the support
// exceeds options.solve_cap; export the LP and use an external solver then.
milp::MilpSolution solve_robust(const RobustCounterpartModel& rc, const milp::SolveLimits& limits = {},
                                const RobustOptions& options = {});

std::string robust_manifest_json(const RobustCounterpartModel& rc, const TransitInstance& instance);

// Fixed assignment as seen by the uncertain rows: travel cost sum c lambda,
// passengers served per support flow, and the epigraph value alpha.
struct RobustAssignment {
  double cost = 0.0;
  std::vector<double> served;
  double alpha = 0.0;
};
RobustAssignment robust_assignment(const RobustCounterpartModel& rc, const std::vector<double>& values);

struct WorstCase {
  std::vector<double> zeta;          // maximizer of the epigraph left-hand side
  double value = 0.0;                // cost + M sum(mu + s zeta - served)
  std::vector<double> zeta_slack;    // minimizer of the tightest availability row
  double min_slack = 0.0;            // min over zeta, f of mu_f + s_f zeta_f - served_f
  std::size_t slack_flow = 0;
  std::size_t points = 0;
};
// Exhaustive over the extreme points; support must not exceed 20 flows.
WorstCase worst_case_oracle(const BudgetUncertaintySet& uset, const RobustAssignment& assignment,
                            const ModelParams& params);

struct RobustViolation {
  std::string row;  // "epigraph" or "availability(o,d,t)"
  std::vector<double> zeta;
  double amount = 0.0;
};
struct RobustValidationReport {
  std::vector<RobustViolation> violations;
  std::size_t samples = 0;
  std::size_t extreme_points = 0;
  bool empty() const { return violations.empty(); }
};

// Checks the epigraph row (relative tolerance tol * max(1, |alpha|)) and
// every availability row (absolute tol) at n_samples random zeta and, for
// supports up to 20 flows, at every extreme point; larger supports get the
// exact worst case in closed form instead.
RobustValidationReport validate_robust_assignment(const BudgetUncertaintySet& uset, const RobustAssignment& assignment,
                                                  const ModelParams& params, std::size_t n_samples,
                                                  std::uint64_t seed, double tol = 1e-6);
// Same for a solved counterpart; throws InvalidInput if `values` violate the
// counterpart model itself.
RobustValidationReport validate_robust_solution(const RobustCounterpartModel& rc, const std::vector<double>& values,
                                                std::size_t n_samples, std::uint64_t seed, double tol = 1e-6);

// Uniform draw in the box, rescaled onto the l1 ball when outside it.
std::vector<double> sample_budget_point(std::size_t n, double gamma, std::uint64_t seed, std::uint64_t index);

}  // namespace tfsp
