#pragma once

// Flow-set reductions: the exact positive-support reduction and the
// epsilon-threshold heuristic with its loss bound 2 M l f(eps), where f(eps)
// counts excluded flows and l = max(mu + sigma) over the original flows.

#include <string>
#include <vector>

#include "tfsp/formulations.hpp"
#include "tfsp/ingest.hpp"
#include "tfsp/robust.hpp"

namespace tfsp {

enum class ReductionMode { kPositiveSupport, kEpsilonThreshold };
std::string to_string(ReductionMode mode);

struct ReductionReport {
  std::size_t original_flow_count = 0;
  std::size_t reduced_flow_count = 0;
  double epsilon = 0.0;
  std::size_t f_epsilon = 0;
  double ell = 0.0;
  double lambda_bound = 0.0;
  double big_m = 0.0;
  ReductionMode mode = ReductionMode::kEpsilonThreshold;
};
std::string reduction_report_json(const ReductionReport& report);

// Flows of `flows` with positive demand in the scenario, sorted.
std::vector<PassengerFlow> reduce_positive(const std::vector<PassengerFlow>& flows, const DemandScenario& scenario);
// One selection per scenario for the stochastic model.
std::vector<FlowSelection> reduce_positive(const ScenarioSet& scenarios);
// Flows with positive mean.
std::vector<PassengerFlow> reduce_positive(const FlowStats& stats);

struct Reduction {
  std::vector<PassengerFlow> flows;
  ReductionReport report;
};

// Keeps flows with mean strictly above epsilon. The original flow set is
// every flow listed in stats.mean, zero means included. Throws InvalidInput
// for a negative or non-finite epsilon.
Reduction reduce_heuristic(const FlowStats& stats, double epsilon, double big_m);

// 1/m for m observed days.
double default_epsilon(std::size_t days);

struct CurvePoint {
  double epsilon = 0.0;
  std::size_t f_epsilon = 0;
  double lambda_bound = 0.0;
};
// Throws InvalidInput unless `epsilons` is sorted ascending.
std::vector<CurvePoint> reduction_curve(const FlowStats& stats, const std::vector<double>& epsilons, double big_m);

struct LossCertificate {
  double z_full = 0.0;
  double z_reduced = 0.0;
  double gap_observed = 0.0;
  double lambda_bound = 0.0;
  bool satisfied = false;
  ReductionReport report;
};
// Solves the robust counterpart on the positive-mean support and on the
// epsilon-reduced support and checks 0 <= gap <= bound (tolerance 1e-6
// relative). Throws SolverError if either solve is not optimal.
LossCertificate certify_loss(const TransitInstance& instance, const FlowStats& stats, double epsilon, double gamma_u,
                             const ModelParams& params, const milp::SolveLimits& limits = {},
                             const RobustOptions& options = {});

}  // namespace tfsp
