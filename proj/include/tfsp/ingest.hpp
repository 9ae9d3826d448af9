#pragma once

// File formats (instance / schedule JSON, scenario / stats CSV), per-flow
// demand statistics and the synthetic Poisson demand generator.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tfsp/core_types.hpp"

namespace tfsp {

struct DemandScenario {
  std::string id;
  std::map<PassengerFlow, long> counts;  // zero counts are never stored

  long total() const;
  long count(const PassengerFlow& flow) const;
};

struct ScenarioSet {
  std::vector<DemandScenario> scenarios;
  std::vector<double> probabilities;

  static ScenarioSet uniform(std::vector<DemandScenario> scenarios);
  std::size_t size() const { return scenarios.size(); }
  // Throws InvalidInput unless nonempty, sizes match, probabilities are
  // nonnegative and sum to 1 within 1e-9.
  void validate() const;
};

struct FlowStats {
  std::map<PassengerFlow, double> mean;
  std::map<PassengerFlow, double> std;

  // Flows with mean > 0, sorted.
  std::vector<PassengerFlow> support() const;
  double mean_of(const PassengerFlow& flow) const;
  double std_of(const PassengerFlow& flow) const;
};

// Throws InvalidInput when a flow key breaks the line/horizon invariants or
// a count is negative.
void validate_scenario(const DemandScenario& scenario, const TransitInstance& instance);

// Sample mean and population standard deviation over all scenarios, with
// a flow missing from a scenario counted as zero. Flows with zero mean are
// dropped. Scenario probabilities are not used: every day counts once.
FlowStats demand_stats(const ScenarioSet& set);

// Independent Poisson draw with rate beta * mean for every flow in the
// support. Each flow uses its own PRNG stream keyed on (seed, flow), so the
// result does not depend on iteration order or on other flows.
DemandScenario synth_demand(const FlowStats& stats, double beta, std::uint64_t seed, std::string id = "synth");

// One Poisson draw on the stream for `key`; exposed for testing.
long poisson_draw(double rate, std::uint64_t seed, const std::string& key, std::uint64_t draw_index = 0);

// Instance JSON. Missing params fall back to the base-case defaults.
TransitInstance parse_instance(const std::string& json_text, const std::string& source = "instance");
std::string instance_to_json(const TransitInstance& instance);
TransitInstance load_instance(const std::filesystem::path& path);
void save_instance(const TransitInstance& instance, const std::filesystem::path& path);

// Scenario CSV: scenario_id,origin,destination,period,count. Scenarios are
// returned in order of first appearance.
std::vector<DemandScenario> read_scenarios_csv(std::istream& in, const std::string& source = "scenarios");
void write_scenarios_csv(std::ostream& out, const std::vector<DemandScenario>& scenarios);
std::vector<DemandScenario> load_scenarios(const std::filesystem::path& path);
void save_scenarios(const std::vector<DemandScenario>& scenarios, const std::filesystem::path& path);

// Stats CSV: origin,destination,period,mean,std.
FlowStats read_stats_csv(std::istream& in, const std::string& source = "stats");
void write_stats_csv(std::ostream& out, const FlowStats& stats);
FlowStats load_stats(const std::filesystem::path& path);
void save_stats(const FlowStats& stats, const std::filesystem::path& path);

// Schedule JSON: {"dispatches": [{"pattern", "vehicle", "period"}],
// "active_patterns": [...]}. Without active_patterns, every dispatched
// pattern is active. Other top-level keys are ignored.
Schedule parse_schedule(const std::string& json_text, const std::string& source = "schedule");
std::string schedule_to_json(const Schedule& schedule);
Schedule load_schedule(const std::filesystem::path& path);
void save_schedule(const Schedule& schedule, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tfsp
