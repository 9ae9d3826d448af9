#pragma once

// Builders for the nominal, crowding and stochastic dispatch models and the
// schedule read back from a solved model.
//
// Variable names:
//   x(p,v,t)            dispatch of vehicle type v on pattern p in period t
//   y(p)                pattern p active
//   lam(o,d,t,p,v,tau)  passengers of flow (o,d,t) boarding the (p,v,tau) vehicle
//   unmet(o,d,t)        unsatisfied passengers of flow (o,d,t)
//   z(p,v,s,tau)        segment after stop s of the (p,v,tau) vehicle is crowded
// Stochastic models tag per-scenario names with the scenario id in braces,
// e.g. lam{s1}(o,d,t,p,v,tau) and unmet{s1}(o,d,t).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfsp/core_types.hpp"
#include "tfsp/ingest.hpp"
#include "tfsp/milp/model.hpp"
#include "tfsp/milp/solver.hpp"

namespace tfsp {

struct LambdaVar {
  int var = -1;
  int scenario = 0;
  PassengerFlow flow;
  std::size_t pattern = 0;  // index into line.patterns()
  std::size_t vehicle = 0;  // index into vehicle_types
  int tau = 1;
  double wait_minutes = 0.0;
  double in_vehicle_minutes = 0.0;
};

struct LoadRow {
  int row = -1;
  int scenario = 0;
  std::size_t pattern = 0;
  std::size_t vehicle = 0;
  std::size_t stop_pos = 0;  // load after visiting this stop position
  int tau = 1;
  int z = -1;  // crowding variable, -1 outside (P-C)
  std::vector<int> lambdas;  // indices into FormulationIndex::lambdas
};

struct FormulationIndex {
  std::map<DispatchKey, int> x;
  std::map<std::string, int> y;
  std::vector<LambdaVar> lambdas;
  std::vector<std::string> scenario_ids;
  std::vector<std::vector<PassengerFlow>> flows;        // per scenario, sorted
  std::vector<std::map<PassengerFlow, int>> unmet;      // per scenario
  std::vector<std::map<PassengerFlow, double>> demand;  // per scenario, only flows in `flows`
  std::vector<LoadRow> loads;
  std::map<std::string, int> row_counts;  // constraint family -> rows
};

enum class ModelKind { kNominal, kCrowding, kStochastic, kRobust };

struct BuiltModel {
  ModelKind kind = ModelKind::kNominal;
  milp::MilpModel model;
  FormulationIndex index;
  ModelParams params;
};

// Flow set of a model. Without an explicit list the builders use every
// (o, d, t) of the instance, so zero-demand flows appear as variables.
struct FlowSelection {
  std::optional<std::vector<PassengerFlow>> flows;
};

BuiltModel build_nominal(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                         const FlowSelection& selection = {});
// Nominal model with real-valued demand, e.g. the mean demand.
BuiltModel build_nominal(const TransitInstance& instance, const std::string& id,
                         const std::map<PassengerFlow, double>& demand, const ModelParams& params,
                         const FlowSelection& selection = {});
BuiltModel build_crowding(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                          const FlowSelection& selection = {});
// `per_scenario` optionally gives each scenario its own flow set.
BuiltModel build_stochastic(const TransitInstance& instance, const ScenarioSet& scenarios, const ModelParams& params,
                            const std::vector<FlowSelection>& per_scenario = {});

// Shared (x, y) block and feasible-schedule rows; exposed for the robust
// builder.
void add_schedule_block(const TransitInstance& instance, const ModelParams& params, BuiltModel& built);
// Registers a scenario (id, its flow list and demand per flow) in the index;
// flows missing from `demand` get zero.
void begin_scenario(BuiltModel& built, const std::string& id, std::vector<PassengerFlow> flows,
                    const std::map<PassengerFlow, double>& demand);
// Adds admissible lambda variables of one scenario with the given objective
// weight and upper bounds, and returns their indices grouped per flow.
std::map<PassengerFlow, std::vector<int>> add_lambda_block(const TransitInstance& instance, const ModelParams& params,
                                                           const std::vector<PassengerFlow>& flows,
                                                           const std::map<PassengerFlow, double>& upper,
                                                           double weight, int scenario, BuiltModel& built);
// Adds capacity rows L <= Cbar x (or the crowding variant) for one scenario.
void add_capacity_rows(const TransitInstance& instance, const ModelParams& params, int scenario, bool crowding,
                       double weight, BuiltModel& built);

// Model manifest: counts per variable/row family and the lambda catalog.
std::string manifest_json(const BuiltModel& built, const TransitInstance& instance);

// Reads x and y with a 0.5 threshold. Throws InvalidInput when a binary is
// further than 1e-6 from 0 or 1.
Schedule extract_schedule(const BuiltModel& built, const std::vector<double>& values);

// Fixes every x and y to the schedule (bounds), leaving the assignment
// free. Throws InvalidInput if the schedule names unknown dispatches.
void fix_schedule(BuiltModel& built, const Schedule& schedule);

// Per-solution aggregates of the assignment.
struct AssignmentTotals {
  double served = 0.0;
  double unmet = 0.0;
  double demand = 0.0;
  double wait_minutes = 0.0;       // sum of w * lambda
  double in_vehicle_minutes = 0.0; // sum of phi * lambda
};
AssignmentTotals assignment_totals(const BuiltModel& built, const std::vector<double>& values, int scenario = 0);

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

}  // namespace tfsp
