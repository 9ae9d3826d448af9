#pragma once

// Fixed-schedule passenger assignment, schedule metrics, paired schedule
// comparisons and parameter sweeps with their report writers.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfsp/formulations.hpp"
#include "tfsp/ingest.hpp"
#include "tfsp/milp/solver.hpp"
#include "tfsp/robust.hpp"

namespace tfsp {

struct Boarding {
  PassengerFlow flow;
  std::string pattern;
  std::string vehicle;
  int tau = 1;
  double passengers = 0.0;
  double wait_minutes = 0.0;       // per passenger
  double in_vehicle_minutes = 0.0; // per passenger
};

struct SegmentLoad {
  std::string pattern;
  std::string vehicle;
  int tau = 1;
  std::string from_stop;
  double load = 0.0;
  int seats = 0;
  int max_capacity = 0;
  double minutes = 0.0;
};

// Averages are over served passengers (0 when nobody is served).
struct EvaluationReport {
  std::string scenario_id;
  double avg_wait_minutes = 0.0;
  double avg_in_vehicle_minutes = 0.0;
  double unsatisfied_fraction = 0.0;  // sum unmet / sum demand, 0 for no demand
  std::map<std::string, double> crowded_time_fraction;  // per pattern
  double total_objective = 0.0;
  double served = 0.0;
  double unmet = 0.0;
  double demand = 0.0;
};

struct AssignmentResult {
  std::vector<Boarding> boardings;  // passengers > 0 only
  std::vector<SegmentLoad> loads;   // every segment of every dispatched vehicle
  EvaluationReport report;
};

// Optimal assignment LP with the dispatches fixed. Throws InvalidInput if the
// schedule breaks a schedule invariant or the scenario is invalid.
AssignmentResult assign_passengers(const Schedule& schedule, const DemandScenario& scenario,
                                   const TransitInstance& instance, const ModelParams& params);

// Metrics of an assignment given per-lambda values (shared with sweeps).
EvaluationReport summarize_assignment(const BuiltModel& built, const std::vector<double>& values,
                                      const TransitInstance& instance, const Schedule& schedule,
                                      std::vector<Boarding>* boardings = nullptr,
                                      std::vector<SegmentLoad>* loads = nullptr);

std::vector<EvaluationReport> evaluate_schedule(const Schedule& schedule, const std::vector<DemandScenario>& scenarios,
                                                const TransitInstance& instance, const ModelParams& params,
                                                std::size_t workers = 1);

struct ComparisonRow {
  std::string scenario_id;
  double wait_a = 0.0, wait_b = 0.0, wait_decrease_pct = 0.0;
  double travel_a = 0.0, travel_b = 0.0, travel_decrease_pct = 0.0;  // in-vehicle minutes
};

// Decrease of A relative to B in percent: 100 (B - A) / B, NaN when B = 0.
// Means are arithmetic means of the rows; wins count rows where A is
// strictly lower.
struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // sorted by scenario id
  double mean_wait_a = 0.0, mean_wait_b = 0.0, mean_wait_decrease_pct = 0.0;
  double mean_travel_a = 0.0, mean_travel_b = 0.0, mean_travel_decrease_pct = 0.0;
  std::size_t wait_wins = 0, travel_wins = 0, both_wins = 0;
};

double decrease_pct(double a, double b);

// Pairs reports by scenario id. Throws InvalidInput on empty input or
// mismatched ids.
ComparisonReport compare_evaluations(const std::vector<EvaluationReport>& a, const std::vector<EvaluationReport>& b);
ComparisonReport compare_schedules(const Schedule& a, const Schedule& b, const std::vector<DemandScenario>& scenarios,
                                   const TransitInstance& instance, const ModelParams& params, std::size_t workers = 1);

struct SweepRow {
  double parameter = 0.0;
  bool ok = false;
  std::string error;
  std::string status;
  double objective = 0.0;
  double gap = 0.0;
  double wait_total = 0.0;        // sum w lambda
  double in_vehicle_total = 0.0;  // sum phi lambda
  double unmet_total = 0.0;
  double avg_wait_minutes = 0.0;
  double avg_in_vehicle_minutes = 0.0;
  double unsatisfied_fraction = 0.0;
  std::map<std::string, int> pattern_vehicles;
  std::map<std::string, double> crowded_time_fraction;
  double crowded_minutes = 0.0;  // vehicle-minutes with load above seats
  Schedule schedule;
};

struct Sweep {
  std::string parameter;  // "gamma", "omega" or "gamma_u"
  std::vector<SweepRow> rows;
  std::vector<std::string> violations;  // structural checks that failed
};

// Each grid point is solved from scratch; a failed point is recorded and the
// sweep continues. Grids must be nonempty and sorted ascending.
Sweep gamma_sweep(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                  const std::vector<double>& gammas, const milp::SolveLimits& limits = {}, std::size_t workers = 1);
Sweep omega_sweep(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                  const std::vector<double>& omegas, const milp::SolveLimits& limits = {}, std::size_t workers = 1);
Sweep gamma_u_sweep(const TransitInstance& instance, const FlowStats& stats, const ModelParams& params,
                    const std::vector<double>& gammas_u, const std::optional<std::vector<PassengerFlow>>& support = {},
                    const milp::SolveLimits& limits = {}, std::size_t workers = 1,
                    const RobustOptions& options = {});

// gamma: objective nondecreasing and concave, wait nondecreasing, in-vehicle
// nonincreasing. omega: crowded time nonincreasing. gamma_u: objective
// nondecreasing. Tolerance is relative to the magnitudes involved.
std::vector<std::string> sweep_violations(const Sweep& sweep, double tol = 1e-6);

// Writers. Numbers use the shortest round-trip form; NaN prints as "nan".
std::string format_value(double v);
std::string evaluation_json(const std::vector<EvaluationReport>& reports);
std::string evaluation_csv(const std::vector<EvaluationReport>& reports);
std::string comparison_json(const ComparisonReport& report);
std::string comparison_csv(const ComparisonReport& report);
std::string sweep_json(const Sweep& sweep);
std::string sweep_csv(const Sweep& sweep);
// Line chart of average wait and in-vehicle minutes over the parameter.
std::string sweep_svg(const Sweep& sweep);

// Summary table with one row per uncertainty budget: the candidate's mean
// wait and in-vehicle minutes, its decrease against a comparison schedule
// and against a baseline, and the solver gap ("OPT" when closed, "n/a"
// when unknown).
struct BudgetTableRow {
  double gamma_u = 0.0;
  ComparisonReport versus_compare;
  ComparisonReport versus_baseline;
  double gap = 0.0;
};
std::string budget_table_header();
std::string budget_table_line(const BudgetTableRow& row);
std::string budget_table_csv(const std::vector<BudgetTableRow>& rows);

}  // namespace tfsp
