#include "tfsp/downsizing.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tfsp/error.hpp"

namespace tfsp {

std::string to_string(ReductionMode mode) {
  return mode == ReductionMode::kPositiveSupport ? "positive-support" : "epsilon-threshold";
}

std::string reduction_report_json(const ReductionReport& r) {
  nlohmann::ordered_json doc;
  doc["mode"] = to_string(r.mode);
  doc["original_flow_count"] = r.original_flow_count;
  doc["reduced_flow_count"] = r.reduced_flow_count;
  doc["epsilon"] = r.epsilon;
  doc["f_epsilon"] = r.f_epsilon;
  doc["ell"] = r.ell;
  doc["big_m"] = r.big_m;
  doc["lambda_bound"] = r.lambda_bound;
  return doc.dump(2) + "\n";
}

std::vector<PassengerFlow> reduce_positive(const std::vector<PassengerFlow>& flows, const DemandScenario& scenario) {
  std::vector<PassengerFlow> out;
  for (const auto& f : flows) {
    if (scenario.count(f) > 0) out.push_back(f);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<FlowSelection> reduce_positive(const ScenarioSet& scenarios) {
  std::vector<FlowSelection> out;
  for (const auto& sc : scenarios.scenarios) {
    std::vector<PassengerFlow> flows;
    for (const auto& [f, c] : sc.counts) {
      if (c > 0) flows.push_back(f);
    }
    out.push_back(FlowSelection{std::move(flows)});
  }
  return out;
}

std::vector<PassengerFlow> reduce_positive(const FlowStats& stats) { return stats.support(); }

namespace {

double ell_of(const FlowStats& stats) {
  double ell = 0.0;
  for (const auto& [f, mu] : stats.mean) ell = std::max(ell, mu + stats.std_of(f));
  return ell;
}

void check_epsilon(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw InvalidInput("epsilon must be finite and >= 0");
}

}  // namespace

Reduction reduce_heuristic(const FlowStats& stats, double epsilon, double big_m) {
  check_epsilon(epsilon);
  Reduction r;
  for (const auto& [f, mu] : stats.mean) {
    if (mu > epsilon) r.flows.push_back(f);
  }
  auto& rep = r.report;
  rep.mode = ReductionMode::kEpsilonThreshold;
  rep.original_flow_count = stats.mean.size();
  rep.reduced_flow_count = r.flows.size();
  rep.epsilon = epsilon;
  rep.f_epsilon = rep.original_flow_count - rep.reduced_flow_count;
  rep.ell = ell_of(stats);
  rep.big_m = big_m;
  rep.lambda_bound = 2.0 * big_m * rep.ell * static_cast<double>(rep.f_epsilon);
  return r;
}

double default_epsilon(std::size_t days) {
  if (days == 0) throw InvalidInput("default epsilon needs at least one day");
  return 1.0 / static_cast<double>(days);
}

std::vector<CurvePoint> reduction_curve(const FlowStats& stats, const std::vector<double>& epsilons, double big_m) {
  if (!std::is_sorted(epsilons.begin(), epsilons.end())) throw InvalidInput("epsilon grid must be sorted ascending");
  std::vector<CurvePoint> out;
  for (double e : epsilons) {
    const auto r = reduce_heuristic(stats, e, big_m);
    out.push_back({e, r.report.f_epsilon, r.report.lambda_bound});
  }
  return out;
}

namespace {

double solve_support(const TransitInstance& instance, const FlowStats& stats, const std::vector<PassengerFlow>& flows,
                     double gamma_u, const ModelParams& params, const milp::SolveLimits& limits,
                     const RobustOptions& options) {
  // With nothing to serve the epigraph row reads alpha >= 0.
  if (flows.empty()) return 0.0;
  const auto rc = build_robust_counterpart(instance, BudgetUncertaintySet(stats, gamma_u, flows), params, options);
  const auto sol = solve_robust(rc, limits, options);
  if (sol.status != milp::SolveStatus::kOptimal) {
    throw SolverError("robust solve on " + std::to_string(flows.size()) + " flows ended " + milp::to_string(sol.status));
  }
  return sol.objective;
}

}  // namespace

LossCertificate certify_loss(const TransitInstance& instance, const FlowStats& stats, double epsilon, double gamma_u,
                             const ModelParams& params, const milp::SolveLimits& limits, const RobustOptions& options) {
  auto red = reduce_heuristic(stats, epsilon, params.big_m);
  LossCertificate c;
  c.report = red.report;
  c.z_full = solve_support(instance, stats, stats.support(), gamma_u, params, limits, options);
  c.z_reduced = solve_support(instance, stats, red.flows, gamma_u, params, limits, options);
  c.gap_observed = c.z_full - c.z_reduced;
  c.lambda_bound = red.report.lambda_bound;
  const double tol = 1e-6 * std::max(1.0, std::abs(c.z_full));
  c.satisfied = c.gap_observed >= -tol && c.gap_observed <= c.lambda_bound + tol;
  return c;
}

}  // namespace tfsp
