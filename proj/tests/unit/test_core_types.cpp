#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "tfsp/error.hpp"

using namespace tfsp;

namespace {

Pattern pattern_345() {
  return Pattern("p", {"s1", "s2", "s3", "s4"},
                 {Duration::from_minutes(3), Duration::from_minutes(4), Duration::from_minutes(5)});
}

// Pattern whose first stop is 'first' and whose origin 'o' is reached after
// `access_tenths`.
Pattern access_pattern(std::int64_t access_tenths) {
  return Pattern("q", {"first", "o", "d"}, {Duration::from_tenths(access_tenths), Duration::from_minutes(1)});
}

}  // namespace

TEST(Duration, ParsesTenths) {
  EXPECT_EQ(Duration::parse_minutes(2.3).tenths(), 23);
  EXPECT_EQ(Duration::parse_minutes(7).tenths(), 70);
  EXPECT_THROW(Duration::parse_minutes(1.25), InvalidInput);
}

TEST(TimeGrid, RequiresWholePeriods) {
  auto g = TimeGrid::make(420, 540, 5);
  EXPECT_EQ(g.num_periods(), 24);
  EXPECT_EQ(g.period_start_minute(2), 425);
  EXPECT_THROW(TimeGrid::make(0, 12, 5), InvalidInput);
  EXPECT_THROW(TimeGrid::make(10, 10, 5), InvalidInput);
  EXPECT_THROW(TimeGrid::make(0, 10, 0), InvalidInput);
}

TEST(CumulativeTime, PrefixSums) {
  const auto p = pattern_345();
  EXPECT_EQ(cumulative_time(p, "s1", "s4"), Duration::from_minutes(12));
  EXPECT_EQ(cumulative_time(p, "s2", "s3"), Duration::from_minutes(4));
  EXPECT_THROW(cumulative_time(p, "s3", "s2"), InvalidInput);
  EXPECT_THROW(cumulative_time(p, "s1", "zz"), InvalidInput);
}

TEST(CumulativeTime, RandomPatternsMatchSegmentSums) {
  std::mt19937 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::string> stops;
    std::vector<Duration> segs;
    std::vector<std::int64_t> raw;
    for (int k = 0; k < 6; ++k) stops.push_back("x" + std::to_string(k));
    for (int k = 0; k < 5; ++k) {
      raw.push_back(std::uniform_int_distribution<int>(0, 150)(rng));
      segs.push_back(Duration::from_tenths(raw.back()));
    }
    const Pattern p("r", stops, segs);
    for (int a = 0; a < 6; ++a) {
      for (int b = a + 1; b < 6; ++b) {
        std::int64_t sum = 0;
        for (int k = a; k < b; ++k) sum += raw[k];
        EXPECT_EQ(cumulative_time(p, stops[a], stops[b]).tenths(), sum);
        for (int c = b + 1; c < 6; ++c) {
          EXPECT_EQ(cumulative_time(p, stops[a], stops[b]) + cumulative_time(p, stops[b], stops[c]),
                    cumulative_time(p, stops[a], stops[c]));
        }
      }
    }
  }
}

TEST(EarliestDeparture, Examples) {
  const auto g = TimeGrid::make(0, 30, 5);
  const Pattern zero("z", {"o", "d"}, {Duration::from_minutes(2)});
  EXPECT_EQ(earliest_departure({"o", "d", 5}, zero, g), 5);
  EXPECT_EQ(earliest_departure({"o", "d", 6}, zero, g), 6);
  EXPECT_EQ(earliest_departure({"o", "d", 1}, access_pattern(70), g), 1);
  EXPECT_EQ(earliest_departure({"o", "d", 4}, access_pattern(70), g), 3);
  // A flow arriving after the horizon's last departure has no vehicle.
  EXPECT_EQ(earliest_departure({"o", "d", 7}, zero, g), std::nullopt);
  EXPECT_THROW(earliest_departure({"d", "o", 1}, zero, g), InvalidInput);
}

TEST(LatestBoardable, Examples) {
  const auto g = TimeGrid::make(0, 30, 5);
  const Pattern zero("z", {"o", "d"}, {Duration::from_minutes(2)});
  EXPECT_EQ(latest_boardable_period(3, zero, "o", "d", g), 3);
  EXPECT_EQ(latest_boardable_period(1, access_pattern(120), "o", "d", g), 3);
  EXPECT_EQ(latest_boardable_period(2, access_pattern(300), "o", "d", g), 6);
}

TEST(BoardingWindow, DualityByEnumeration) {
  for (int T = 1; T <= 8; ++T) {
    for (int delta : {1, 3, 5}) {
      const auto g = TimeGrid::make(0, T * delta, delta);
      for (std::int64_t access : {0, 7, 10, 49, 50, 51, 123, 400}) {
        const auto p = access_pattern(access);
        for (int t = 1; t <= T; ++t) {
          const auto tau0 = earliest_departure({"o", "d", t}, p, g);
          for (int tau = 1; tau <= T; ++tau) {
            // Direct check of the boarding inequality in tenths.
            const bool boards = (tau - 1) * delta * 10 + access >= (t - 1) * delta * 10;
            EXPECT_EQ(boards, tau0.has_value() && tau >= *tau0);
            EXPECT_EQ(t <= latest_boardable_period(tau, p, "o", "d", g), tau0.has_value() && tau >= *tau0);
          }
        }
      }
    }
  }
}

TEST(WaitTime, DefinitionAndSteps) {
  const auto g = TimeGrid::make(0, 30, 5);
  const Pattern zero("z", {"o", "d"}, {Duration::from_minutes(2)});
  EXPECT_EQ(wait_time({"o", "d", 3}, zero, 3, g), Duration{});
  EXPECT_EQ(wait_time({"o", "d", 1}, access_pattern(70), 2, g), Duration::from_minutes(12));
  for (int tau = 3; tau < 6; ++tau) {
    EXPECT_EQ(wait_time({"o", "d", 3}, zero, tau + 1, g) - wait_time({"o", "d", 3}, zero, tau, g),
              Duration::from_minutes(5));
  }
  EXPECT_THROW(wait_time({"o", "d", 3}, zero, 2, g), InvalidInput);
}

TEST(TransitLine, ValidatesPatterns) {
  std::vector<std::string> stops{"A", "B", "C"};
  EXPECT_THROW(TransitLine(stops, {Pattern("p", {"A", "C", "B"}, {Duration{}, Duration{}})}, 1), InvalidInput);
  EXPECT_THROW(TransitLine(stops, {}, 1), InvalidInput);
  EXPECT_THROW(Pattern("p", {"A"}, {}), InvalidInput);
  EXPECT_THROW(TransitLine(stops, {Pattern("p", {"A", "C"}, {Duration{}}), Pattern("p", {"A", "B"}, {Duration{}})}, 1),
               InvalidInput);
  EXPECT_THROW(TransitLine(stops, {Pattern("p", {"A", "C"}, {Duration{}})}, 0), InvalidInput);
}

TEST(ModelParams, BigMDominance) {
  auto inst = oracle::single_pattern_instance({3, 4}, 6, 5, 2, 3, 5);
  ModelParams p = inst.params;
  p.big_m = 37;  // 6*5 + 7 = 37 is not enough
  EXPECT_THROW(validate_big_m(inst, p), InvalidInput);
  p.big_m = 37.5;
  EXPECT_NO_THROW(validate_big_m(inst, p));
}

TEST(Schedule, InvariantChecker) {
  auto inst = oracle::single_pattern_instance({3, 4}, 4, 5, 2, 3, 2);
  inst.vehicle_types.push_back({"van", 1, 2, {{"all", 0.5}}});
  Schedule ok;
  ok.dispatches = {{"all", "bus", 1}, {"all", "van", 2}};
  ok.active_patterns = {"all"};
  ok.normalize();
  EXPECT_TRUE(check_schedule(ok, inst, inst.params).empty());

  Schedule two_types = ok;
  two_types.dispatches.push_back({"all", "van", 1});
  two_types.normalize();
  EXPECT_FALSE(check_schedule(two_types, inst, inst.params).empty());

  Schedule inactive = ok;
  inactive.active_patterns.clear();
  EXPECT_FALSE(check_schedule(inactive, inst, inst.params).empty());

  Schedule over = ok;
  over.dispatches.push_back({"all", "bus", 3});
  over.normalize();
  EXPECT_FALSE(check_schedule(over, inst, inst.params).empty());  // cost 2.5 > 2
}

TEST(Flows, UniverseIsOrderedPairsTimesPeriods) {
  auto inst = oracle::single_pattern_instance({1, 1, 1, 1}, 3, 5, 1, 1, 1);
  const auto flows = all_flows(inst);
  EXPECT_EQ(flows.size(), 5u * 4u / 2u * 3u);
  EXPECT_TRUE(std::is_sorted(flows.begin(), flows.end()));
  EXPECT_THROW(validate_flow({"S2", "S1", 1}, inst), InvalidInput);
  EXPECT_THROW(validate_flow({"S1", "S2", 4}, inst), InvalidInput);
}
