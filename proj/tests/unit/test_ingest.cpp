#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support/fixtures.hpp"
#include "tfsp/error.hpp"

using namespace tfsp;
using oracle::fixture_path;

TEST(LoadInstance, SmallFixture) {
  auto inst = load_instance(fixture_path("two_pattern_small.json"));
  EXPECT_EQ(inst.line.stops().size(), 6u);
  EXPECT_EQ(inst.line.patterns().size(), 2u);
  EXPECT_EQ(inst.num_periods(), 6);
  EXPECT_EQ(inst.params.budget, 3.0);
  EXPECT_EQ(inst.line.max_active_patterns(), 1);
}

TEST(LoadInstance, Errors) {
  try {
    load_instance(fixture_path("bad_order.json"));
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("pattern not subsequence"), std::string::npos);
  }
  EXPECT_THROW(load_instance(fixture_path("no_patterns.json")), InvalidInput);
  try {
    parse_instance("{\"stops\": [\"A\",\n \"B\"", "broken.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  try {
    parse_instance(R"({"stops": ["A","B"], "patterns": [{"id": 3}]})", "typed.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("patterns[0]"), std::string::npos);
  }
}

TEST(LoadInstance, DefaultsAndRoundTrip) {
  auto inst = load_instance(fixture_path("two_pattern_small.json"));
  const std::string text = instance_to_json(inst);
  auto again = parse_instance(text);
  EXPECT_EQ(instance_to_json(again), text);
  auto minimal = parse_instance(R"({
    "stops": ["A","B"], "patterns": [{"id":"p","stop_ids":["A","B"],"segment_minutes":[2.5]}],
    "vehicle_types": [{"id":"v","seats":1,"max_capacity":2,"cost_per_pattern":{"p":1}}],
    "time_grid": {"start_minute": 0, "end_minute": 120}})");
  EXPECT_EQ(minimal.grid.delta, 5);
  EXPECT_EQ(minimal.num_periods(), 24);
  EXPECT_EQ(minimal.params.big_m, 1e5);
  EXPECT_EQ(minimal.params.budget, 20);
  EXPECT_EQ(minimal.params.gamma, 1);
  EXPECT_EQ(minimal.line.patterns()[0].total_time().tenths(), 25);
}

TEST(Scenarios, CsvRoundTrip) {
  auto scenarios = load_scenarios(fixture_path("scenarios_small.csv"));
  ASSERT_EQ(scenarios.size(), 2u);
  EXPECT_EQ(scenarios[0].id, "s1");
  EXPECT_EQ(scenarios[0].total(), 12);
  EXPECT_EQ(scenarios[1].count({"D", "F", 4}), 3);
  std::ostringstream os;
  write_scenarios_csv(os, scenarios);
  std::istringstream in(os.str());
  auto again = read_scenarios_csv(in);
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0].counts, scenarios[0].counts);
  EXPECT_EQ(again[1].counts, scenarios[1].counts);
  std::istringstream bad("scenario_id,origin,destination,period,count\ns,A,B,1,-2\n");
  EXPECT_THROW(read_scenarios_csv(bad), ParseError);
  std::istringstream bad_header("id,o,d\n");
  EXPECT_THROW(read_scenarios_csv(bad_header), ParseError);
}

TEST(DemandStats, PopulationStd) {
  DemandScenario a{"a", {{{"A", "B", 1}, 2}}};
  DemandScenario b{"b", {{{"A", "B", 1}, 4}, {{"A", "C", 1}, 2}}};
  auto stats = demand_stats(ScenarioSet::uniform({a, b}));
  EXPECT_DOUBLE_EQ(stats.mean_of({"A", "B", 1}), 3.0);
  EXPECT_DOUBLE_EQ(stats.std_of({"A", "B", 1}), 1.0);
  EXPECT_DOUBLE_EQ(stats.mean_of({"A", "C", 1}), 1.0);
  EXPECT_DOUBLE_EQ(stats.std_of({"A", "C", 1}), 1.0);
  EXPECT_EQ(stats.mean.count({"B", "C", 1}), 0u);

  auto single = demand_stats(ScenarioSet::uniform({b}));
  for (const auto& [f, c] : b.counts) {
    EXPECT_DOUBLE_EQ(single.mean_of(f), static_cast<double>(c));
    EXPECT_DOUBLE_EQ(single.std_of(f), 0.0);
  }
  EXPECT_THROW(demand_stats(ScenarioSet{}), InvalidInput);
}

TEST(DemandStats, CsvRoundTrip) {
  auto stats = demand_stats(ScenarioSet::uniform(load_scenarios(fixture_path("scenarios_small.csv"))));
  std::ostringstream os;
  write_stats_csv(os, stats);
  std::istringstream in(os.str());
  auto again = read_stats_csv(in);
  EXPECT_EQ(again.mean, stats.mean);
  EXPECT_EQ(again.std, stats.std);
}

TEST(ScenarioSet, Validation) {
  auto set = ScenarioSet::uniform({DemandScenario{"a", {}}, DemandScenario{"b", {}}});
  EXPECT_NO_THROW(set.validate());
  set.probabilities = {0.3, 0.6};
  EXPECT_THROW(set.validate(), InvalidInput);
  set.probabilities = {-0.5, 1.5};
  EXPECT_THROW(set.validate(), InvalidInput);
}

TEST(SynthDemand, ZeroBetaAndDeterminism) {
  FlowStats stats;
  stats.mean[{"A", "B", 1}] = 1.5;
  stats.mean[{"A", "C", 2}] = 0.2;
  stats.std[{"A", "B", 1}] = 0.5;
  stats.std[{"A", "C", 2}] = 0.1;
  EXPECT_TRUE(synth_demand(stats, 0.0, 1).counts.empty());
  EXPECT_THROW(synth_demand(stats, -1.0, 1), InvalidInput);
  auto a = synth_demand(stats, 4.0, 7);
  auto b = synth_demand(stats, 4.0, 7);
  EXPECT_EQ(a.counts, b.counts);
  for (const auto& [f, c] : a.counts) EXPECT_TRUE(stats.mean.count(f));
  // A flow's draw does not depend on which other flows are present.
  FlowStats one;
  one.mean[{"A", "B", 1}] = 1.5;
  EXPECT_EQ(synth_demand(one, 4.0, 7).count({"A", "B", 1}), a.count({"A", "B", 1}));
}

TEST(SynthDemand, PoissonMeanAndVariance) {
  // rate 6: sample mean within 0.1 of 6 over 10,000 independent draws
  double sum = 0.0, sq = 0.0;
  constexpr int n = 10000;
  for (int i = 0; i < n; ++i) {
    FlowStats s;
    s.mean[{"A", "B", 1}] = 1.5;
    const double c = static_cast<double>(synth_demand(s, 4.0, static_cast<std::uint64_t>(i)).count({"A", "B", 1}));
    sum += c;
    sq += c * c;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 6.0, 0.1);
  EXPECT_NEAR(sq / n - mean * mean, 6.0, 0.4);
}

TEST(SynthDemand, LargeRatesSplit) {
  double sum = 0.0;
  for (int i = 0; i < 200; ++i) sum += static_cast<double>(poisson_draw(1800.0, static_cast<std::uint64_t>(i), "k"));
  EXPECT_NEAR(sum / 200.0, 1800.0, 3.0 * std::sqrt(1800.0 / 200.0) * 1.5);
}

TEST(Schedules, JsonRoundTrip) {
  Schedule s;
  s.dispatches = {{"local", "bus", 3}, {"local", "bus", 1}};
  s.active_patterns = {"local"};
  const auto text = schedule_to_json(s);
  auto again = parse_schedule(text);
  s.normalize();
  EXPECT_EQ(again.dispatches, s.dispatches);
  EXPECT_EQ(again.active_patterns, s.active_patterns);
  auto derived = parse_schedule(R"({"dispatches": [{"pattern": "express", "vehicle": "bus", "period": 2}]})");
  EXPECT_EQ(derived.active_patterns, std::vector<std::string>{"express"});
}
