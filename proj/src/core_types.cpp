#include "tfsp/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tfsp/error.hpp"

namespace tfsp {

Duration Duration::parse_minutes(double minutes) {
  if (!std::isfinite(minutes)) throw InvalidInput("duration is not finite");
  const double scaled = minutes * 10.0;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6) {
    std::ostringstream os;
    os << "duration " << minutes << " is not a multiple of 0.1 minutes";
    throw InvalidInput(os.str());
  }
  return Duration::from_tenths(static_cast<std::int64_t>(rounded));
}

TimeGrid TimeGrid::make(int start_minute, int end_minute, int delta) {
  if (end_minute <= start_minute) throw InvalidInput("time grid: end_minute must exceed start_minute");
  if (delta < 1) throw InvalidInput("time grid: delta must be at least 1 minute");
  if ((end_minute - start_minute) % delta != 0) {
    throw InvalidInput("time grid: horizon is not a whole number of periods");
  }
  return TimeGrid{start_minute, end_minute, delta};
}

Pattern::Pattern(std::string id, std::vector<std::string> stop_ids, std::vector<Duration> segment_minutes)
    : id_(std::move(id)), stop_ids_(std::move(stop_ids)), segments_(std::move(segment_minutes)) {
  if (id_.empty()) throw InvalidInput("pattern id must be nonempty");
  if (stop_ids_.size() < 2) throw InvalidInput("pattern " + id_ + ": needs at least two stops");
  if (segments_.size() + 1 != stop_ids_.size()) {
    throw InvalidInput("pattern " + id_ + ": segment_minutes must have one entry per consecutive stop pair");
  }
  prefix_.reserve(stop_ids_.size());
  prefix_.push_back(Duration{});
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    if (segments_[k] < Duration{}) throw InvalidInput("pattern " + id_ + ": negative segment time");
    prefix_.push_back(prefix_.back() + segments_[k]);
  }
  for (std::size_t k = 0; k < stop_ids_.size(); ++k) {
    if (!position_.emplace(stop_ids_[k], k).second) {
      throw InvalidInput("pattern " + id_ + ": stop " + stop_ids_[k] + " repeated");
    }
  }
}

std::optional<std::size_t> Pattern::find(const std::string& stop) const {
  auto it = position_.find(stop);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

std::size_t Pattern::position(const std::string& stop) const {
  auto pos = find(stop);
  if (!pos) throw InvalidInput("stop " + stop + " not in pattern " + id_);
  return *pos;
}

bool Pattern::serves_pair(const std::string& origin, const std::string& destination) const {
  auto o = find(origin);
  auto d = find(destination);
  return o && d && *o < *d;
}

TransitLine::TransitLine(std::vector<std::string> stops, std::vector<Pattern> patterns, int max_active_patterns)
    : stops_(std::move(stops)), patterns_(std::move(patterns)), max_active_patterns_(max_active_patterns) {
  if (stops_.size() < 2) throw InvalidInput("line needs at least two stops");
  for (std::size_t i = 0; i < stops_.size(); ++i) {
    if (!stop_index_.emplace(stops_[i], i).second) throw InvalidInput("stop " + stops_[i] + " repeated on line");
  }
  if (patterns_.empty()) throw InvalidInput("line needs at least one pattern");
  if (max_active_patterns_ < 1) throw InvalidInput("max_active_patterns must be at least 1");
  std::set<std::string> ids;
  for (const auto& p : patterns_) {
    if (!ids.insert(p.id()).second) throw InvalidInput("pattern id " + p.id() + " repeated");
    std::optional<std::size_t> last;
    for (const auto& s : p.stop_ids()) {
      auto idx = stop_index(s);
      if (!idx || (last && *idx <= *last)) {
        throw InvalidInput("pattern not subsequence: pattern " + p.id() + " stop " + s);
      }
      last = idx;
    }
  }
}

std::optional<std::size_t> TransitLine::stop_index(const std::string& stop) const {
  auto it = stop_index_.find(stop);
  if (it == stop_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TransitLine::pattern_index(const std::string& id) const {
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    if (patterns_[i].id() == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> TransitInstance::vehicle_index(const std::string& id) const {
  for (std::size_t i = 0; i < vehicle_types.size(); ++i) {
    if (vehicle_types[i].id == id) return i;
  }
  return std::nullopt;
}

void validate_big_m(const TransitInstance& instance, const ModelParams& params) {
  Duration longest;
  for (const auto& p : instance.line.patterns()) longest = std::max(longest, p.total_time());
  const double bound = static_cast<double>(instance.num_periods()) * instance.grid.delta + longest.minutes();
  if (!(params.big_m > bound)) {
    std::ostringstream os;
    os << "big_m " << params.big_m << " must exceed T*delta + longest pattern time = " << bound;
    throw InvalidInput(os.str());
  }
}

void validate_params(const TransitInstance& instance, const ModelParams& params) {
  if (!(params.gamma >= 0.0)) throw InvalidInput("gamma must be nonnegative");
  if (!(params.omega >= 0.0)) throw InvalidInput("omega must be nonnegative");
  if (!(params.budget >= 0.0)) throw InvalidInput("budget must be nonnegative");
  if (params.budget_mode == BudgetMode::kPerVehicleType) {
    for (const auto& v : instance.vehicle_types) {
      auto it = params.vehicle_budgets.find(v.id);
      if (it == params.vehicle_budgets.end()) throw InvalidInput("per-type budget missing for vehicle " + v.id);
      if (!(it->second >= 0.0)) throw InvalidInput("per-type budget must be nonnegative for vehicle " + v.id);
    }
  }
  validate_big_m(instance, params);
}

void TransitInstance::validate() const {
  if (vehicle_types.empty()) throw InvalidInput("instance needs at least one vehicle type");
  std::set<std::string> ids;
  for (const auto& v : vehicle_types) {
    if (v.id.empty()) throw InvalidInput("vehicle type id must be nonempty");
    if (!ids.insert(v.id).second) throw InvalidInput("vehicle type id " + v.id + " repeated");
    if (v.seats < 1) throw InvalidInput("vehicle " + v.id + ": seats must be at least 1");
    if (v.max_capacity < v.seats) throw InvalidInput("vehicle " + v.id + ": max_capacity must be >= seats");
    for (const auto& p : line.patterns()) {
      auto it = v.cost_per_pattern.find(p.id());
      if (it == v.cost_per_pattern.end()) {
        throw InvalidInput("vehicle " + v.id + ": missing cost for pattern " + p.id());
      }
      if (!(it->second >= 0.0)) throw InvalidInput("vehicle " + v.id + ": negative cost");
    }
    for (const auto& [pid, c] : v.cost_per_pattern) {
      if (!line.pattern_index(pid)) throw InvalidInput("vehicle " + v.id + ": cost for unknown pattern " + pid);
    }
  }
  for (const auto& row : extra_rows) {
    for (const auto& t : row.terms) {
      if (!line.pattern_index(t.pattern)) throw InvalidInput("row " + row.name + ": unknown pattern " + t.pattern);
      if (!vehicle_index(t.vehicle)) throw InvalidInput("row " + row.name + ": unknown vehicle " + t.vehicle);
      if (t.period < 1 || t.period > num_periods()) throw InvalidInput("row " + row.name + ": period out of range");
    }
  }
  validate_params(*this, params);
}

void Schedule::normalize() {
  std::sort(dispatches.begin(), dispatches.end());
  dispatches.erase(std::unique(dispatches.begin(), dispatches.end()), dispatches.end());
  std::sort(active_patterns.begin(), active_patterns.end());
  active_patterns.erase(std::unique(active_patterns.begin(), active_patterns.end()), active_patterns.end());
}

bool Schedule::dispatched(const std::string& pattern, const std::string& vehicle, int period) const {
  return std::binary_search(dispatches.begin(), dispatches.end(), DispatchKey{pattern, vehicle, period});
}

bool Schedule::active(const std::string& pattern) const {
  return std::binary_search(active_patterns.begin(), active_patterns.end(), pattern);
}

namespace {

bool row_holds(double lhs, RowSense sense, double rhs) {
  constexpr double kTol = 1e-9;
  switch (sense) {
    case RowSense::kLessEqual: return lhs <= rhs + kTol;
    case RowSense::kGreaterEqual: return lhs >= rhs - kTol;
    case RowSense::kEqual: return std::abs(lhs - rhs) <= kTol;
  }
  return false;
}

}  // namespace

std::vector<std::string> check_schedule(const Schedule& schedule, const TransitInstance& instance,
                                        const ModelParams& params) {
  std::vector<std::string> out;
  std::map<std::pair<std::string, int>, int> per_pattern_period;
  std::map<std::string, double> per_vehicle;
  double cost = 0.0;
  for (const auto& d : schedule.dispatches) {
    auto p = instance.line.pattern_index(d.pattern);
    auto v = instance.vehicle_index(d.vehicle);
    if (!p || !v) {
      out.push_back("unknown pattern or vehicle in dispatch " + d.pattern + "/" + d.vehicle);
      continue;
    }
    if (d.period < 1 || d.period > instance.num_periods()) {
      out.push_back("dispatch period out of range for " + d.pattern + "/" + d.vehicle);
      continue;
    }
    if (++per_pattern_period[{d.pattern, d.period}] == 2) {
      out.push_back("more than one vehicle type on pattern " + d.pattern + " in period " + std::to_string(d.period));
    }
    if (!schedule.active(d.pattern)) out.push_back("dispatch on inactive pattern " + d.pattern);
    cost += instance.vehicle_types[*v].cost_per_pattern.at(d.pattern);
    per_vehicle[d.vehicle] += 1.0;
  }
  for (const auto& a : schedule.active_patterns) {
    if (!instance.line.pattern_index(a)) out.push_back("unknown active pattern " + a);
  }
  if (static_cast<int>(schedule.active_patterns.size()) > instance.line.max_active_patterns()) {
    out.push_back("too many active patterns");
  }
  if (params.budget_mode == BudgetMode::kTotal) {
    if (cost > params.budget + 1e-9) out.push_back("budget exceeded");
  } else {
    for (const auto& [vid, count] : per_vehicle) {
      auto it = params.vehicle_budgets.find(vid);
      if (it == params.vehicle_budgets.end() || count > it->second + 1e-9) {
        out.push_back("per-type budget exceeded for vehicle " + vid);
      }
    }
  }
  for (const auto& row : instance.extra_rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) {
      if (schedule.dispatched(t.pattern, t.vehicle, t.period)) lhs += t.coef;
    }
    if (!row_holds(lhs, row.sense, row.rhs)) out.push_back("extra row " + row.name + " violated");
  }
  return out;
}

Duration cumulative_time(const Pattern& pattern, const std::string& from, const std::string& to) {
  const std::size_t a = pattern.position(from);
  const std::size_t b = pattern.position(to);
  if (a >= b) throw InvalidInput("cumulative_time: " + from + " does not precede " + to + " on pattern " + pattern.id());
  return pattern.offset_at(b) - pattern.offset_at(a);
}

namespace {

void require_pair(const Pattern& pattern, const std::string& o, const std::string& d) {
  if (!pattern.serves_pair(o, d)) {
    throw InvalidInput("pattern " + pattern.id() + " does not serve " + o + " -> " + d + " in order");
  }
}

// Whole periods a vehicle needs to reach `origin` from the pattern start.
std::int64_t access_periods(const Pattern& pattern, const std::string& origin, const TimeGrid& grid) {
  return pattern.access_time(origin).tenths() / grid.period_length().tenths();
}

}  // namespace

std::optional<int> earliest_departure(const PassengerFlow& flow, const Pattern& pattern, const TimeGrid& grid) {
  require_pair(pattern, flow.origin, flow.destination);
  // (tau-1)*D + access >= (t-1)*D  <=>  tau >= t - floor(access / D)
  const std::int64_t tau = std::max<std::int64_t>(1, flow.period - access_periods(pattern, flow.origin, grid));
  if (tau > grid.num_periods()) return std::nullopt;
  return static_cast<int>(tau);
}

int latest_boardable_period(int tau, const Pattern& pattern, const std::string& origin,
                            const std::string& destination, const TimeGrid& grid) {
  require_pair(pattern, origin, destination);
  if (tau < 1 || tau > grid.num_periods()) throw InvalidInput("latest_boardable_period: tau out of range");
  const std::int64_t t = tau + access_periods(pattern, origin, grid);
  return static_cast<int>(std::min<std::int64_t>(t, grid.num_periods()));
}

Duration wait_time(const PassengerFlow& flow, const Pattern& pattern, int tau, const TimeGrid& grid) {
  require_pair(pattern, flow.origin, flow.destination);
  const Duration wait = grid.period_offset(tau) + pattern.access_time(flow.origin) - grid.period_offset(flow.period);
  if (wait < Duration{}) {
    throw InvalidInput("wait_time: vehicle departing in period " + std::to_string(tau) + " passes " + flow.origin +
                       " before the flow arrives");
  }
  return wait;
}

std::vector<PassengerFlow> all_flows(const TransitInstance& instance) {
  std::vector<PassengerFlow> flows;
  const auto& stops = instance.line.stops();
  for (std::size_t i = 0; i < stops.size(); ++i) {
    for (std::size_t j = i + 1; j < stops.size(); ++j) {
      for (int t = 1; t <= instance.num_periods(); ++t) flows.push_back({stops[i], stops[j], t});
    }
  }
  std::sort(flows.begin(), flows.end());
  return flows;
}

void validate_flow(const PassengerFlow& flow, const TransitInstance& instance) {
  auto o = instance.line.stop_index(flow.origin);
  auto d = instance.line.stop_index(flow.destination);
  if (!o || !d) throw InvalidInput("flow " + to_string(flow) + ": unknown stop");
  if (*o >= *d) throw InvalidInput("flow " + to_string(flow) + ": origin must precede destination");
  if (flow.period < 1 || flow.period > instance.num_periods()) {
    throw InvalidInput("flow " + to_string(flow) + ": period out of range");
  }
}

std::string to_string(const PassengerFlow& flow) {
  return "(" + flow.origin + "," + flow.destination + "," + std::to_string(flow.period) + ")";
}

}  // namespace tfsp
