#include "tfsp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tfsp/error.hpp"

namespace tfsp {

using nlohmann::json;
using nlohmann::ordered_json;

long DemandScenario::total() const {
  long n = 0;
  for (const auto& [f, c] : counts) n += c;
  return n;
}

long DemandScenario::count(const PassengerFlow& flow) const {
  auto it = counts.find(flow);
  return it == counts.end() ? 0 : it->second;
}

ScenarioSet ScenarioSet::uniform(std::vector<DemandScenario> scenarios) {
  ScenarioSet set;
  const double p = scenarios.empty() ? 0.0 : 1.0 / static_cast<double>(scenarios.size());
  set.probabilities.assign(scenarios.size(), p);
  set.scenarios = std::move(scenarios);
  return set;
}

void ScenarioSet::validate() const {
  if (scenarios.empty()) throw InvalidInput("scenario set is empty");
  if (probabilities.size() != scenarios.size()) throw InvalidInput("one probability per scenario required");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw InvalidInput("scenario probabilities must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("scenario probabilities must sum to 1");
  std::set<std::string> ids;
  for (const auto& s : scenarios) {
    if (!ids.insert(s.id).second) throw InvalidInput("scenario id " + s.id + " repeated");
  }
}

std::vector<PassengerFlow> FlowStats::support() const {
  std::vector<PassengerFlow> out;
  for (const auto& [f, m] : mean) {
    if (m > 0.0) out.push_back(f);
  }
  return out;
}

double FlowStats::mean_of(const PassengerFlow& flow) const {
  auto it = mean.find(flow);
  return it == mean.end() ? 0.0 : it->second;
}

double FlowStats::std_of(const PassengerFlow& flow) const {
  auto it = std.find(flow);
  return it == std.end() ? 0.0 : it->second;
}

void validate_scenario(const DemandScenario& scenario, const TransitInstance& instance) {
  for (const auto& [flow, c] : scenario.counts) {
    validate_flow(flow, instance);
    if (c < 0) throw InvalidInput("scenario " + scenario.id + ": negative count for " + to_string(flow));
  }
}

FlowStats demand_stats(const ScenarioSet& set) {
  if (set.scenarios.empty()) throw InvalidInput("demand_stats: empty scenario set");
  std::map<PassengerFlow, std::vector<double>> samples;
  const std::size_t m = set.scenarios.size();
  for (std::size_t e = 0; e < m; ++e) {
    for (const auto& [flow, c] : set.scenarios[e].counts) {
      auto& v = samples[flow];
      if (v.empty()) v.assign(m, 0.0);
      v[e] = static_cast<double>(c);
    }
  }
  FlowStats stats;
  for (const auto& [flow, v] : samples) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(m);
    if (!(mean > 0.0)) continue;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    stats.mean.emplace(flow, mean);
    stats.std.emplace(flow, std::sqrt(ss / static_cast<double>(m)));
  }
  return stats;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr const char* kPoissonStream = "poisson-v1";
constexpr double kMaxChunkRate = 500.0;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

long poisson_inversion(double rate, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double p = std::exp(-rate);
  double cdf = p;
  long k = 0;
  const long cap = static_cast<long>(rate + 40.0 * std::sqrt(rate) + 100.0);
  while (u > cdf && k < cap) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::string flow_key(const PassengerFlow& f) { return f.origin + "|" + f.destination + "|" + std::to_string(f.period); }

}  // namespace

long poisson_draw(double rate, std::uint64_t seed, const std::string& key, std::uint64_t draw_index) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidInput("poisson rate must be finite and nonnegative");
  if (rate == 0.0) return 0;
  const std::uint64_t stream = splitmix64(seed ^ splitmix64(fnv1a(std::string(kPoissonStream) + "|" + key)) ^
                                          splitmix64(draw_index + 0x51ed27ULL));
  std::mt19937_64 rng(stream);
  // Large rates are split into chunks so exp(-rate) stays representable.
  long total = 0;
  double left = rate;
  while (left > 0.0) {
    const double chunk = std::min(left, kMaxChunkRate);
    total += poisson_inversion(chunk, rng);
    left -= chunk;
  }
  return total;
}

DemandScenario synth_demand(const FlowStats& stats, double beta, std::uint64_t seed, std::string id) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("synth_demand: beta must be nonnegative");
  DemandScenario out;
  out.id = std::move(id);
  if (beta == 0.0) return out;
  for (const auto& [flow, mean] : stats.mean) {
    if (!(mean > 0.0)) continue;
    const long c = poisson_draw(beta * mean, seed, flow_key(flow));
    if (c > 0) out.counts.emplace(flow, c);
  }
  return out;
}

// ---------------------------------------------------------------- JSON

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path, const std::string& source) : j_(j), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_ + ": field " + (path_.empty() ? std::string("<root>") : path_) + ": " + what);
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Reader at(const char* key) const {
    if (!j_.is_object()) fail("expected object");
    if (!j_.contains(key)) Reader(j_, join(key), source_).fail("missing");
    return Reader(j_.at(key), join(key), source_);
  }
  Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]", source_); }

  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected array");
    return j_.size();
  }
  std::vector<std::string> object_keys() const {
    if (!j_.is_object()) fail("expected object");
    std::vector<std::string> keys;
    for (auto it = j_.begin(); it != j_.end(); ++it) keys.push_back(it.key());
    return keys;
  }
  Reader member(const std::string& key) const { return Reader(j_.at(key), join(key), source_); }

  std::string str() const {
    if (!j_.is_string()) fail("expected string");
    return j_.get<std::string>();
  }
  double num() const {
    if (!j_.is_number()) fail("expected number");
    return j_.get<double>();
  }
  int integer() const {
    if (!j_.is_number_integer()) {
      if (j_.is_number_float()) {
        const double d = j_.get<double>();
        if (std::floor(d) == d && std::abs(d) < 2e9) return static_cast<int>(d);
      }
      fail("expected integer");
    }
    return j_.get<int>();
  }
  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0, n = array_size(); i < n; ++i) out.push_back(at(i).str());
    return out;
  }
  void only_keys(std::initializer_list<const char*> allowed) const {
    for (const auto& k : object_keys()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) member(k).fail("unknown field");
    }
  }
  const std::string& path() const { return path_; }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  const std::string& source_;
};

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number.
    const std::size_t upto = std::min(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError(source + ": line " + std::to_string(line) + ": " + e.what());
  }
}

RowSense parse_sense(const Reader& r) {
  const std::string s = r.str();
  if (s == "<=") return RowSense::kLessEqual;
  if (s == ">=") return RowSense::kGreaterEqual;
  if (s == "=" || s == "==") return RowSense::kEqual;
  r.fail("sense must be one of <=, >=, =");
}

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::kLessEqual: return "<=";
    case RowSense::kGreaterEqual: return ">=";
    case RowSense::kEqual: return "=";
  }
  return "?";
}

ModelParams parse_params(const Reader& r) {
  ModelParams p;
  r.only_keys({"gamma", "big_m", "omega", "budget", "budget_mode", "vehicle_budgets"});
  if (r.has("gamma")) p.gamma = r.at("gamma").num();
  if (r.has("big_m")) p.big_m = r.at("big_m").num();
  if (r.has("omega")) p.omega = r.at("omega").num();
  if (r.has("budget")) p.budget = r.at("budget").num();
  if (r.has("budget_mode")) {
    const std::string mode = r.at("budget_mode").str();
    if (mode == "total") {
      p.budget_mode = BudgetMode::kTotal;
    } else if (mode == "per_vehicle_type") {
      p.budget_mode = BudgetMode::kPerVehicleType;
    } else {
      r.at("budget_mode").fail("expected total or per_vehicle_type");
    }
  }
  if (r.has("vehicle_budgets")) {
    const Reader vb = r.at("vehicle_budgets");
    for (const auto& k : vb.object_keys()) p.vehicle_budgets[k] = vb.member(k).num();
  }
  return p;
}

}  // namespace

TransitInstance parse_instance(const std::string& json_text, const std::string& source) {
  const json doc = parse_json_text(json_text, source);
  const Reader root(doc, "", source);
  root.only_keys({"name", "description", "stops", "patterns", "max_active_patterns", "vehicle_types", "time_grid",
                  "params", "extra_rows"});

  TransitInstance inst;
  const auto stops = root.at("stops").strings();
  std::vector<Pattern> patterns;
  const Reader pats = root.at("patterns");
  for (std::size_t i = 0, n = pats.array_size(); i < n; ++i) {
    const Reader pr = pats.at(i);
    pr.only_keys({"id", "stop_ids", "segment_minutes"});
    std::vector<Duration> segs;
    const Reader sr = pr.at("segment_minutes");
    for (std::size_t k = 0, ns = sr.array_size(); k < ns; ++k) {
      try {
        segs.push_back(Duration::parse_minutes(sr.at(k).num()));
      } catch (const InvalidInput& e) {
        sr.at(k).fail(e.what());
      }
    }
    try {
      patterns.emplace_back(pr.at("id").str(), pr.at("stop_ids").strings(), std::move(segs));
    } catch (const InvalidInput& e) {
      pr.fail(e.what());
    }
  }
  const int max_active = root.has("max_active_patterns") ? root.at("max_active_patterns").integer()
                                                         : static_cast<int>(patterns.size());
  inst.line = TransitLine(stops, std::move(patterns), max_active);

  const Reader vts = root.at("vehicle_types");
  for (std::size_t i = 0, n = vts.array_size(); i < n; ++i) {
    const Reader vr = vts.at(i);
    vr.only_keys({"id", "seats", "max_capacity", "cost_per_pattern"});
    VehicleType v;
    v.id = vr.at("id").str();
    v.seats = vr.at("seats").integer();
    v.max_capacity = vr.at("max_capacity").integer();
    const Reader cr = vr.at("cost_per_pattern");
    for (const auto& k : cr.object_keys()) v.cost_per_pattern[k] = cr.member(k).num();
    inst.vehicle_types.push_back(std::move(v));
  }

  const Reader tg = root.at("time_grid");
  tg.only_keys({"start_minute", "end_minute", "delta"});
  inst.grid = TimeGrid::make(tg.at("start_minute").integer(), tg.at("end_minute").integer(),
                             tg.has("delta") ? tg.at("delta").integer() : 5);

  if (root.has("params")) inst.params = parse_params(root.at("params"));

  if (root.has("extra_rows")) {
    const Reader rows = root.at("extra_rows");
    for (std::size_t i = 0, n = rows.array_size(); i < n; ++i) {
      const Reader rr = rows.at(i);
      rr.only_keys({"name", "terms", "sense", "rhs"});
      DispatchRow row;
      row.name = rr.at("name").str();
      row.sense = parse_sense(rr.at("sense"));
      row.rhs = rr.at("rhs").num();
      const Reader ts = rr.at("terms");
      for (std::size_t k = 0, nt = ts.array_size(); k < nt; ++k) {
        const Reader tr = ts.at(k);
        tr.only_keys({"pattern", "vehicle", "period", "coef"});
        DispatchRow::Term t;
        t.pattern = tr.at("pattern").str();
        t.vehicle = tr.at("vehicle").str();
        t.period = tr.at("period").integer();
        t.coef = tr.has("coef") ? tr.at("coef").num() : 1.0;
        row.terms.push_back(std::move(t));
      }
      inst.extra_rows.push_back(std::move(row));
    }
  }
  inst.validate();
  return inst;
}

std::string instance_to_json(const TransitInstance& inst) {
  ordered_json doc;
  doc["stops"] = inst.line.stops();
  doc["max_active_patterns"] = inst.line.max_active_patterns();
  ordered_json pats = ordered_json::array();
  for (const auto& p : inst.line.patterns()) {
    ordered_json pj;
    pj["id"] = p.id();
    pj["stop_ids"] = p.stop_ids();
    ordered_json segs = ordered_json::array();
    for (const auto& s : p.segments()) segs.push_back(s.minutes());
    pj["segment_minutes"] = std::move(segs);
    pats.push_back(std::move(pj));
  }
  doc["patterns"] = std::move(pats);
  ordered_json vts = ordered_json::array();
  for (const auto& v : inst.vehicle_types) {
    ordered_json vj;
    vj["id"] = v.id;
    vj["seats"] = v.seats;
    vj["max_capacity"] = v.max_capacity;
    ordered_json costs = ordered_json::object();
    for (const auto& [k, c] : v.cost_per_pattern) costs[k] = c;
    vj["cost_per_pattern"] = std::move(costs);
    vts.push_back(std::move(vj));
  }
  doc["vehicle_types"] = std::move(vts);
  doc["time_grid"] = {{"start_minute", inst.grid.start_minute},
                      {"end_minute", inst.grid.end_minute},
                      {"delta", inst.grid.delta}};
  ordered_json params;
  params["gamma"] = inst.params.gamma;
  params["big_m"] = inst.params.big_m;
  params["omega"] = inst.params.omega;
  params["budget"] = inst.params.budget;
  params["budget_mode"] = inst.params.budget_mode == BudgetMode::kTotal ? "total" : "per_vehicle_type";
  ordered_json vb = ordered_json::object();
  for (const auto& [k, b] : inst.params.vehicle_budgets) vb[k] = b;
  params["vehicle_budgets"] = std::move(vb);
  doc["params"] = std::move(params);
  ordered_json rows = ordered_json::array();
  for (const auto& r : inst.extra_rows) {
    ordered_json rj;
    rj["name"] = r.name;
    ordered_json terms = ordered_json::array();
    for (const auto& t : r.terms) {
      terms.push_back({{"pattern", t.pattern}, {"vehicle", t.vehicle}, {"period", t.period}, {"coef", t.coef}});
    }
    rj["terms"] = std::move(terms);
    rj["sense"] = sense_text(r.sense);
    rj["rhs"] = r.rhs;
    rows.push_back(std::move(rj));
  }
  doc["extra_rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("write failed for " + path.string());
}

TransitInstance load_instance(const std::filesystem::path& path) {
  return parse_instance(read_text_file(path), path.string());
}

void save_instance(const TransitInstance& instance, const std::filesystem::path& path) {
  write_text_file(path, instance_to_json(instance));
}

// ---------------------------------------------------------------- CSV

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source, const std::string& header)
      : in_(in), source_(std::move(source)), width_(split_csv(header).size()) {
    std::string line;
    if (!next_raw(line)) fail("missing header");
    if (line != header) fail("expected header " + header);
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (next_raw(line)) {
      if (line.empty()) continue;
      fields = split_csv(line);
      if (fields.size() != width_) fail("expected " + std::to_string(width_) + " fields");
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_ + ": line " + std::to_string(line_) + ": " + what);
  }

  long to_long(const std::string& s, const char* field) const {
    try {
      std::size_t used = 0;
      const long v = std::stol(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(std::string("field ") + field + ": expected integer, got '" + s + "'");
  }
  double to_double(const std::string& s, const char* field) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    fail(std::string("field ") + field + ": expected number, got '" + s + "'");
  }

 private:
  bool next_raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::istream& in_;
  std::string source_;
  std::size_t width_;
  long line_ = 0;
};

std::string number_text(double v) {
  // JSON's shortest round-trip rendering keeps CSV and JSON output identical.
  return json(v).dump();
}

void check_csv_token(const std::string& s, const char* what) {
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw InvalidInput(std::string(what) + " '" + s + "' cannot be written to CSV");
  }
}

}  // namespace

std::vector<DemandScenario> read_scenarios_csv(std::istream& in, const std::string& source) {
  CsvReader csv(in, source, "scenario_id,origin,destination,period,count");
  std::vector<DemandScenario> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::string> f;
  while (csv.next(f)) {
    auto [it, fresh] = index.emplace(f[0], out.size());
    if (fresh) out.push_back(DemandScenario{f[0], {}});
    const PassengerFlow flow{f[1], f[2], static_cast<int>(csv.to_long(f[3], "period"))};
    const long c = csv.to_long(f[4], "count");
    if (c < 0) csv.fail("field count: negative");
    if (c == 0) continue;
    if (!out[it->second].counts.emplace(flow, c).second) csv.fail("duplicate flow " + to_string(flow));
  }
  return out;
}

void write_scenarios_csv(std::ostream& out, const std::vector<DemandScenario>& scenarios) {
  out << "scenario_id,origin,destination,period,count\n";
  for (const auto& s : scenarios) {
    check_csv_token(s.id, "scenario id");
    for (const auto& [f, c] : s.counts) {
      if (c == 0) continue;
      check_csv_token(f.origin, "stop id");
      check_csv_token(f.destination, "stop id");
      out << s.id << ',' << f.origin << ',' << f.destination << ',' << f.period << ',' << c << '\n';
    }
  }
}

std::vector<DemandScenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_scenarios_csv(in, path.string());
}

void save_scenarios(const std::vector<DemandScenario>& scenarios, const std::filesystem::path& path) {
  std::ostringstream os;
  write_scenarios_csv(os, scenarios);
  write_text_file(path, os.str());
}

FlowStats read_stats_csv(std::istream& in, const std::string& source) {
  CsvReader csv(in, source, "origin,destination,period,mean,std");
  FlowStats stats;
  std::vector<std::string> f;
  while (csv.next(f)) {
    const PassengerFlow flow{f[0], f[1], static_cast<int>(csv.to_long(f[2], "period"))};
    const double mean = csv.to_double(f[3], "mean");
    const double sd = csv.to_double(f[4], "std");
    if (sd < 0.0) csv.fail("field std: negative");
    if (mean < 0.0) csv.fail("field mean: negative");
    if (mean == 0.0) {
      if (sd != 0.0) csv.fail("std given for a zero-mean flow");
      continue;
    }
    if (!stats.mean.emplace(flow, mean).second) csv.fail("duplicate flow " + to_string(flow));
    stats.std.emplace(flow, sd);
  }
  return stats;
}

void write_stats_csv(std::ostream& out, const FlowStats& stats) {
  out << "origin,destination,period,mean,std\n";
  for (const auto& [f, m] : stats.mean) {
    check_csv_token(f.origin, "stop id");
    check_csv_token(f.destination, "stop id");
    out << f.origin << ',' << f.destination << ',' << f.period << ',' << number_text(m) << ','
        << number_text(stats.std_of(f)) << '\n';
  }
}

FlowStats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_stats_csv(in, path.string());
}

void save_stats(const FlowStats& stats, const std::filesystem::path& path) {
  std::ostringstream os;
  write_stats_csv(os, stats);
  write_text_file(path, os.str());
}

// ---------------------------------------------------------------- schedules

Schedule parse_schedule(const std::string& json_text, const std::string& source) {
  const json doc = parse_json_text(json_text, source);
  const Reader root(doc, "", source);
  Schedule s;
  const Reader ds = root.at("dispatches");
  for (std::size_t i = 0, n = ds.array_size(); i < n; ++i) {
    const Reader d = ds.at(i);
    s.dispatches.push_back({d.at("pattern").str(), d.at("vehicle").str(), d.at("period").integer()});
  }
  if (root.has("active_patterns")) {
    s.active_patterns = root.at("active_patterns").strings();
  } else {
    for (const auto& d : s.dispatches) s.active_patterns.push_back(d.pattern);
  }
  s.normalize();
  return s;
}

std::string schedule_to_json(const Schedule& schedule) {
  Schedule s = schedule;
  s.normalize();
  ordered_json doc;
  ordered_json ds = ordered_json::array();
  for (const auto& d : s.dispatches) ds.push_back({{"pattern", d.pattern}, {"vehicle", d.vehicle}, {"period", d.period}});
  doc["dispatches"] = std::move(ds);
  doc["active_patterns"] = s.active_patterns;
  return doc.dump(2) + "\n";
}

Schedule load_schedule(const std::filesystem::path& path) { return parse_schedule(read_text_file(path), path.string()); }

void save_schedule(const Schedule& schedule, const std::filesystem::path& path) {
  write_text_file(path, schedule_to_json(schedule));
}

}  // namespace tfsp
