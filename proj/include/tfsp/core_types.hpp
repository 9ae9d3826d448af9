#pragma once

// Domain model for a single transit line: time discretization, stop
// patterns, vehicle types, passenger flows, schedules and the timing
// quantities (in-vehicle time, earliest departure, boarding window, wait)
// shared by every formulation.
//
// All values are immutable after construction and safe to share.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace tfsp {

// Exact duration stored in tenths of a minute so prefix sums and model
// coefficients are reproducible bit-for-bit.
class Duration {
 public:
  constexpr Duration() = default;
  static constexpr Duration from_tenths(std::int64_t tenths) { return Duration(tenths); }
  static constexpr Duration from_minutes(std::int64_t minutes) { return Duration(minutes * 10); }
  // Throws InvalidInput unless `minutes` is a multiple of 0.1 (within 1e-9).
  static Duration parse_minutes(double minutes);

  constexpr std::int64_t tenths() const { return tenths_; }
  constexpr double minutes() const { return static_cast<double>(tenths_) / 10.0; }

  constexpr Duration operator+(Duration o) const { return Duration(tenths_ + o.tenths_); }
  constexpr Duration operator-(Duration o) const { return Duration(tenths_ - o.tenths_); }
  constexpr Duration& operator+=(Duration o) {
    tenths_ += o.tenths_;
    return *this;
  }
  constexpr auto operator<=>(const Duration&) const = default;

 private:
  constexpr explicit Duration(std::int64_t t) : tenths_(t) {}
  std::int64_t tenths_ = 0;
};

struct TimeGrid {
  int start_minute = 0;
  int end_minute = 0;
  int delta = 1;  // period length in whole minutes

  // Throws InvalidInput when the horizon is empty or not a whole number of
  // periods.
  static TimeGrid make(int start_minute, int end_minute, int delta);

  int num_periods() const { return (end_minute - start_minute) / delta; }
  // Offset of the beginning of period t (1-based) from the horizon start.
  Duration period_offset(int t) const { return Duration::from_minutes(static_cast<std::int64_t>(t - 1) * delta); }
  Duration period_length() const { return Duration::from_minutes(delta); }
  // Minute of day at which period t begins.
  int period_start_minute(int t) const { return start_minute + (t - 1) * delta; }
};

class Pattern {
 public:
  Pattern() = default;
  // segment_minutes[k] is the running time from stop_ids[k] to stop_ids[k+1].
  Pattern(std::string id, std::vector<std::string> stop_ids, std::vector<Duration> segment_minutes);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& stop_ids() const { return stop_ids_; }
  const std::vector<Duration>& segments() const { return segments_; }
  std::size_t size() const { return stop_ids_.size(); }

  bool serves(const std::string& stop) const { return position_.count(stop) != 0; }
  // Position of `stop` in this pattern. Throws InvalidInput if not served.
  std::size_t position(const std::string& stop) const;
  std::optional<std::size_t> find(const std::string& stop) const;
  // Elapsed running time from the first stop to the stop at position k.
  Duration offset_at(std::size_t k) const { return prefix_[k]; }
  // Elapsed running time from the first stop to `stop`.
  Duration access_time(const std::string& stop) const { return prefix_[position(stop)]; }
  Duration total_time() const { return prefix_.back(); }
  // True when both stops are served and origin comes strictly first.
  bool serves_pair(const std::string& origin, const std::string& destination) const;

 private:
  std::string id_;
  std::vector<std::string> stop_ids_;
  std::vector<Duration> segments_;
  std::vector<Duration> prefix_;
  std::map<std::string, std::size_t> position_;
};

class TransitLine {
 public:
  TransitLine() = default;
  // Validates that each pattern is an order-preserving subsequence of
  // `stops` with at least two stops, that pattern ids are unique and that
  // max_active_patterns >= 1.
  TransitLine(std::vector<std::string> stops, std::vector<Pattern> patterns, int max_active_patterns);

  const std::vector<std::string>& stops() const { return stops_; }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  int max_active_patterns() const { return max_active_patterns_; }

  std::optional<std::size_t> stop_index(const std::string& stop) const;
  std::optional<std::size_t> pattern_index(const std::string& id) const;

 private:
  std::vector<std::string> stops_;
  std::vector<Pattern> patterns_;
  int max_active_patterns_ = 1;
  std::map<std::string, std::size_t> stop_index_;
};

struct VehicleType {
  std::string id;
  int seats = 1;
  int max_capacity = 1;
  std::map<std::string, double> cost_per_pattern;
};

// Passengers with origin `origin`, destination `destination` who arrive at
// the origin at the beginning of period `period` (1-based).
struct PassengerFlow {
  std::string origin;
  std::string destination;
  int period = 1;

  auto operator<=>(const PassengerFlow&) const = default;
};

enum class BudgetMode { kTotal, kPerVehicleType };

struct ModelParams {
  double gamma = 1.0;
  double big_m = 1e5;
  double omega = 0.0;
  double budget = 20.0;
  BudgetMode budget_mode = BudgetMode::kTotal;
  // Vehicle counts B_v, only read in kPerVehicleType mode.
  std::map<std::string, double> vehicle_budgets;
};

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

// Agency-specific linear row over dispatch decisions, e.g. "at least five
// buses on pattern p during period t".
struct DispatchRow {
  struct Term {
    std::string pattern;
    std::string vehicle;
    int period = 1;
    double coef = 1.0;
  };
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

struct TransitInstance {
  TransitLine line;
  std::vector<VehicleType> vehicle_types;
  TimeGrid grid;
  ModelParams params;
  std::vector<DispatchRow> extra_rows;

  int num_periods() const { return grid.num_periods(); }
  std::optional<std::size_t> vehicle_index(const std::string& id) const;
  // Checks every cross-object invariant (capacities, costs, parameter
  // ranges, extra rows, M dominance). Throws InvalidInput naming the rule.
  void validate() const;
};

// Checks M > T*delta + longest cumulative pattern time so an unsatisfied
// passenger always costs more than any achievable journey.
void validate_big_m(const TransitInstance& instance, const ModelParams& params);
// Checks γ, ω, budget ranges plus M dominance.
void validate_params(const TransitInstance& instance, const ModelParams& params);

struct DispatchKey {
  std::string pattern;
  std::string vehicle;
  int period = 1;
  auto operator<=>(const DispatchKey&) const = default;
};

// Dispatch decisions x and active-pattern flags y. Only ones are stored.
struct Schedule {
  std::vector<DispatchKey> dispatches;  // sorted, unique
  std::vector<std::string> active_patterns;  // sorted, unique

  bool dispatched(const std::string& pattern, const std::string& vehicle, int period) const;
  bool active(const std::string& pattern) const;
  std::size_t vehicle_count() const { return dispatches.size(); }
  void normalize();
};

// Lists every violated Schedule invariant (single vehicle type per pattern
// and period, dispatch implies active, sparsity, budget, extra rows). An
// empty result means the schedule is feasible.
std::vector<std::string> check_schedule(const Schedule& schedule, const TransitInstance& instance,
                                        const ModelParams& params);

// In-vehicle running time from `from` to `to` along the pattern.
Duration cumulative_time(const Pattern& pattern, const std::string& from, const std::string& to);

// Smallest departure period whose vehicle reaches the flow's origin no
// earlier than the flow arrives there; nullopt if it falls past the horizon.
std::optional<int> earliest_departure(const PassengerFlow& flow, const Pattern& pattern, const TimeGrid& grid);

// Largest arrival period t such that a passenger arriving in t can still
// board the vehicle departing in period tau.
int latest_boardable_period(int tau, const Pattern& pattern, const std::string& origin,
                            const std::string& destination, const TimeGrid& grid);

// Wait between the flow's arrival and the vehicle (departing in tau)
// reaching the origin. Independent of vehicle type.
Duration wait_time(const PassengerFlow& flow, const Pattern& pattern, int tau, const TimeGrid& grid);

// All flows (o, d, t) with o before d on the line and 1 <= t <= T, sorted.
std::vector<PassengerFlow> all_flows(const TransitInstance& instance);

// Throws InvalidInput unless origin precedes destination on the line and the
// period lies inside the horizon.
void validate_flow(const PassengerFlow& flow, const TransitInstance& instance);

std::string to_string(const PassengerFlow& flow);

}  // namespace tfsp
