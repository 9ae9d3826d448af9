#pragma once

#include <string>

#include "tfsp/core_types.hpp"
#include "tfsp/ingest.hpp"

namespace tfsp::oracle {

inline std::string fixture_path(const std::string& name) { return std::string(TFSP_TEST_DATA) + "/fixtures/" + name; }

// Line with stops S0..S{n-1}, a single all-stop pattern "all" with the given
// segment times and one vehicle type "bus".
inline TransitInstance single_pattern_instance(const std::vector<int>& segment_minutes, int periods, int delta,
                                               int seats, int max_capacity, double budget) {
  std::vector<std::string> stops;
  for (std::size_t i = 0; i <= segment_minutes.size(); ++i) stops.push_back("S" + std::to_string(i));
  std::vector<Duration> segs;
  for (int s : segment_minutes) segs.push_back(Duration::from_minutes(s));
  TransitInstance inst;
  inst.line = TransitLine(stops, {Pattern("all", stops, segs)}, 1);
  inst.vehicle_types.push_back({"bus", seats, max_capacity, {{"all", 1.0}}});
  inst.grid = TimeGrid::make(0, periods * delta, delta);
  inst.params.budget = budget;
  inst.validate();
  return inst;
}

}  // namespace tfsp::oracle
