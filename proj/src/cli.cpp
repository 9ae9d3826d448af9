#include "tfsp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfsp/downsizing.hpp"
#include "tfsp/error.hpp"
#include "tfsp/evaluation.hpp"
#include "tfsp/formulations.hpp"
#include "tfsp/ingest.hpp"
#include "tfsp/milp/check.hpp"
#include "tfsp/milp/lp_writer.hpp"
#include "tfsp/milp/solver.hpp"
#include "tfsp/robust.hpp"

namespace tfsp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage_error"; }
};

enum class Kind { kString, kDouble, kInt, kPaths, kDoubles };

struct Key {
  const char* name;
  Kind kind;
  const char* help;
};

// Every setting any command understands. Flags and config-file keys share
// these names.
const std::vector<Key>& all_keys() {
  static const std::vector<Key> keys = {
      {"instance", Kind::kString, "instance JSON"},
      {"scenarios", Kind::kPaths, "scenario CSV files or directories of them"},
      {"scenario-id", Kind::kString, "scenario to use when the files hold several"},
      {"num-scenarios", Kind::kInt, "use only the first N scenarios (0 = all)"},
      {"stats", Kind::kString, "flow statistics CSV (origin,destination,period,mean,std)"},
      {"model", Kind::kString, "nominal | crowding | stochastic | robust"},
      {"gamma", Kind::kDouble, "in-vehicle time weight"},
      {"big-m", Kind::kDouble, "penalty per unsatisfied passenger"},
      {"omega", Kind::kDouble, "crowding penalty per minute"},
      {"budget", Kind::kDouble, "vehicle budget"},
      {"gamma-u", Kind::kDouble, "uncertainty budget of the robust model"},
      {"epsilon", Kind::kDouble, "mean-demand threshold of the flow reduction"},
      {"epsilon-grid", Kind::kDoubles, "comma-separated thresholds for the reduction curve"},
      {"days", Kind::kInt, "observed days behind the statistics"},
      {"time-limit", Kind::kDouble, "solver time limit in seconds"},
      {"gap", Kind::kDouble, "absolute optimality gap"},
      {"relative-gap", Kind::kDouble, "relative optimality gap"},
      {"node-limit", Kind::kInt, "branch-and-bound node limit"},
      {"schedule", Kind::kString, "schedule JSON"},
      {"a", Kind::kString, "candidate schedule JSON"},
      {"b", Kind::kString, "comparison schedule JSON"},
      {"baseline", Kind::kString, "baseline schedule JSON"},
      {"solution", Kind::kString, "solution CSV (variable,value) from an external solver"},
      {"parameter", Kind::kString, "gamma | omega | gamma-u"},
      {"values", Kind::kDoubles, "comma-separated grid"},
      {"beta", Kind::kDouble, "demand scale factor"},
      {"seed", Kind::kInt, "random seed"},
      {"count", Kind::kInt, "number of scenarios to generate"},
      {"workers", Kind::kInt, "worker threads (default from TFSP_WORKERS)"},
      {"output-dir", Kind::kString, "directory for output files"},
  };
  return keys;
}

const Key& key_info(const std::string& name) {
  for (const auto& k : all_keys()) {
    if (name == k.name) return k;
  }
  throw std::logic_error("unknown key " + name);
}

const std::vector<std::string> kModelKeys = {"instance", "scenarios", "scenario-id", "num-scenarios", "stats",
                                             "model", "gamma", "big-m", "omega", "budget", "gamma-u", "epsilon",
                                             "days", "time-limit", "gap", "relative-gap", "node-limit"};

std::vector<std::string> keys_for(const std::string& command) {
  std::vector<std::string> k;
  if (command == "solve" || command == "export-lp") {
    k = kModelKeys;
  } else if (command == "import-solution") {
    k = kModelKeys;
    k.push_back("solution");
  } else if (command == "evaluate") {
    k = {"instance", "schedule", "scenarios", "num-scenarios", "gamma", "big-m"};
  } else if (command == "compare") {
    k = {"instance", "a", "b", "baseline", "scenarios", "num-scenarios", "gamma", "big-m", "gamma-u"};
  } else if (command == "sweep") {
    k = {"instance", "scenarios", "scenario-id", "num-scenarios", "stats", "parameter", "values", "gamma",
         "big-m", "omega", "budget", "gamma-u", "epsilon", "days", "time-limit", "gap", "relative-gap",
         "node-limit"};
  } else if (command == "reduce") {
    k = {"scenarios", "num-scenarios", "stats", "epsilon", "epsilon-grid", "big-m", "days"};
  } else if (command == "gen-demand") {
    k = {"scenarios", "num-scenarios", "stats", "beta", "seed", "count"};
  }
  k.push_back("workers");
  k.push_back("output-dir");
  return k;
}

double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw UsageError("--" + key + ": not a number: '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw UsageError("--" + key + ": not an integer: '" + text + "'");
  }
  return v;
}

ordered_json flag_value(const Key& k, const std::vector<std::string>& raw) {
  switch (k.kind) {
    case Kind::kString:
      return raw.back();
    case Kind::kDouble: {
      const double v = parse_double(k.name, raw.back());
      return std::isinf(v) ? ordered_json(nullptr) : ordered_json(v);
    }
    case Kind::kInt:
      return parse_int(k.name, raw.back());
    case Kind::kPaths:
      return raw;
    case Kind::kDoubles: {
      ordered_json arr = ordered_json::array();
      for (const auto& s : raw) arr.push_back(parse_double(k.name, s));
      return arr;
    }
  }
  return nullptr;
}

// Type check of a config-file value.
ordered_json config_value(const Key& k, const nlohmann::json& v) {
  auto bad = [&] { return UsageError("config key '" + std::string(k.name) + "' has the wrong type"); };
  switch (k.kind) {
    case Kind::kString:
      if (!v.is_string()) throw bad();
      return v.get<std::string>();
    case Kind::kDouble:
      if (v.is_null()) return nullptr;
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case Kind::kInt:
      if (!v.is_number_integer()) throw bad();
      return v.get<long long>();
    case Kind::kPaths: {
      if (v.is_string()) return ordered_json::array({v.get<std::string>()});
      if (!v.is_array()) throw bad();
      ordered_json arr = ordered_json::array();
      for (const auto& e : v) {
        if (!e.is_string()) throw bad();
        arr.push_back(e.get<std::string>());
      }
      return arr;
    }
    case Kind::kDoubles: {
      if (!v.is_array()) throw bad();
      ordered_json arr = ordered_json::array();
      for (const auto& e : v) {
        if (!e.is_number()) throw bad();
        arr.push_back(e.get<double>());
      }
      return arr;
    }
  }
  return nullptr;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("TFSP_WORKERS")) {
    long long v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && v >= 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

// Resolved settings of one invocation.
class Config {
 public:
  Config(std::string command, ordered_json values) : command_(std::move(command)), j_(std::move(values)) {}

  const std::string& command() const { return command_; }
  bool has(const std::string& k) const { return j_.contains(k) && !j_[k].is_null(); }
  std::string str(const std::string& k) const { return has(k) ? j_[k].get<std::string>() : std::string(); }
  std::string require_str(const std::string& k) const {
    if (!has(k) || j_[k].get<std::string>().empty()) throw UsageError(command_ + ": --" + k + " is required");
    return j_[k].get<std::string>();
  }
  double num(const std::string& k) const { return j_.at(k).get<double>(); }
  std::optional<double> opt_num(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    return j_[k].get<double>();
  }
  long long integer(const std::string& k) const { return j_.at(k).get<long long>(); }
  std::vector<std::string> paths(const std::string& k) const {
    return has(k) ? j_[k].get<std::vector<std::string>>() : std::vector<std::string>{};
  }
  std::vector<double> doubles(const std::string& k) const {
    return has(k) ? j_[k].get<std::vector<double>>() : std::vector<double>{};
  }
  std::size_t workers() const { return static_cast<std::size_t>(std::max<long long>(1, integer("workers"))); }
  ordered_json echo() const {
    ordered_json out;
    out["command"] = command_;
    // Where files go and how many threads run do not change any result.
    for (const auto& [k, v] : j_.items()) {
      if (k != "output-dir" && k != "workers") out[k] = v;
    }
    return out;
  }

 private:
  std::string command_;
  ordered_json j_;
};

ordered_json defaults_for(const std::vector<std::string>& keys, const std::string& command) {
  const ModelParams p;
  const milp::SolveLimits lim;
  std::map<std::string, ordered_json> d = {
      {"model", "nominal"},    {"gamma", p.gamma},   {"big-m", p.big_m},     {"omega", p.omega},
      {"budget", p.budget},    {"gamma-u", nullptr}, {"epsilon", nullptr},   {"days", 22},
      {"time-limit", nullptr}, {"gap", lim.gap},     {"relative-gap", lim.relative_gap},
      {"node-limit", lim.node_limit},                {"num-scenarios", 0},   {"beta", 1.0},
      {"seed", 7},             {"count", 1},         {"output-dir", "."},
      {"workers", static_cast<long long>(default_workers())},
  };
  if (command == "reduce") d["epsilon"] = 0.05;
  ordered_json out = ordered_json::object();
  for (const auto& k : keys) {
    auto it = d.find(k);
    out[k] = it == d.end() ? ordered_json(nullptr) : it->second;
  }
  return out;
}

Config resolve(const std::string& command, const std::map<std::string, CLI::Option*>& options,
               const std::map<std::string, std::vector<std::string>>& raw, const std::string& config_path) {
  const auto keys = keys_for(command);
  ordered_json values = defaults_for(keys, command);

  nlohmann::json file = nlohmann::json::object();
  if (!config_path.empty()) {
    try {
      file = nlohmann::json::parse(read_text_file(config_path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(config_path + ": " + e.what());
    }
    if (!file.is_object()) throw ParseError(config_path + ": expected a JSON object");
    for (const auto& [k, v] : file.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw UsageError(config_path + ": key '" + k + "' is not used by " + command);
      }
    }
  }
  auto given = [&](const std::string& k) {
    auto it = options.find(k);
    return it != options.end() && it->second->count() > 0;
  };

  // Model parameters stored in the instance sit between the defaults and
  // the config file.
  std::string instance_path;
  if (given("instance")) {
    instance_path = raw.at("instance").back();
  } else if (file.contains("instance") && file["instance"].is_string()) {
    instance_path = file["instance"].get<std::string>();
  }
  if (!instance_path.empty()) {
    const auto inst = load_instance(instance_path);
    const std::map<std::string, double> from_instance = {{"gamma", inst.params.gamma},
                                                         {"big-m", inst.params.big_m},
                                                         {"omega", inst.params.omega},
                                                         {"budget", inst.params.budget}};
    for (const auto& [k, v] : from_instance) {
      if (values.contains(k)) values[k] = v;
    }
  }
  for (const auto& [k, v] : file.items()) values[k] = config_value(key_info(k), v);
  for (const auto& k : keys) {
    if (given(k)) values[k] = flag_value(key_info(k), raw.at(k));
  }
  return Config(command, std::move(values));
}

// ---- inputs ----

std::vector<DemandScenario> load_scenario_inputs(const Config& cfg) {
  std::vector<DemandScenario> out;
  for (const auto& p : cfg.paths("scenarios")) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        auto s = load_scenarios(f);
        out.insert(out.end(), s.begin(), s.end());
      }
    } else {
      auto s = load_scenarios(p);
      out.insert(out.end(), s.begin(), s.end());
    }
  }
  std::map<std::string, int> seen;
  for (const auto& s : out) {
    if (++seen[s.id] > 1) throw InvalidInput("scenario id '" + s.id + "' appears in more than one input");
  }
  const long long m = cfg.has("num-scenarios") ? cfg.integer("num-scenarios") : 0;
  if (m < 0) throw UsageError("--num-scenarios must be nonnegative");
  if (m > 0) {
    if (static_cast<std::size_t>(m) > out.size()) {
      throw InvalidInput("--num-scenarios " + std::to_string(m) + " but only " + std::to_string(out.size()) +
                         " scenarios were read");
    }
    out.resize(static_cast<std::size_t>(m));
  }
  return out;
}

std::vector<DemandScenario> require_scenarios(const Config& cfg) {
  if (cfg.paths("scenarios").empty()) throw UsageError(cfg.command() + ": --scenarios is required");
  auto s = load_scenario_inputs(cfg);
  if (s.empty()) throw InvalidInput("no scenarios were read");
  return s;
}

DemandScenario pick_scenario(const Config& cfg) {
  const auto all = require_scenarios(cfg);
  if (cfg.has("scenario-id")) {
    const auto id = cfg.str("scenario-id");
    for (const auto& s : all) {
      if (s.id == id) return s;
    }
    throw InvalidInput("scenario '" + id + "' not found");
  }
  if (all.size() != 1) {
    throw UsageError(cfg.command() + ": the input holds " + std::to_string(all.size()) +
                     " scenarios; choose one with --scenario-id");
  }
  return all.front();
}

FlowStats stats_input(const Config& cfg) {
  if (cfg.has("stats")) return load_stats(cfg.str("stats"));
  if (!cfg.paths("scenarios").empty()) return demand_stats(ScenarioSet::uniform(require_scenarios(cfg)));
  throw UsageError(cfg.command() + ": --stats or --scenarios is required");
}

ModelParams model_params(const Config& cfg, const TransitInstance& inst) {
  ModelParams p = inst.params;
  p.gamma = cfg.num("gamma");
  p.big_m = cfg.num("big-m");
  if (cfg.has("omega")) p.omega = cfg.num("omega");
  if (cfg.has("budget")) p.budget = cfg.num("budget");
  return p;
}

milp::SolveLimits solve_limits(const Config& cfg) {
  milp::SolveLimits lim;
  if (cfg.has("time-limit")) lim.time_seconds = cfg.num("time-limit");
  lim.gap = cfg.num("gap");
  lim.relative_gap = cfg.num("relative-gap");
  lim.node_limit = static_cast<long>(cfg.integer("node-limit"));
  if (!(lim.gap >= 0) || !(lim.relative_gap >= 0) || lim.node_limit < 1) {
    throw UsageError("solver gaps must be nonnegative and the node limit positive");
  }
  return lim;
}

TransitInstance instance_input(const Config& cfg) { return load_instance(cfg.require_str("instance")); }

Schedule schedule_input(const std::string& path, nlohmann::json* raw = nullptr) {
  const auto text = read_text_file(path);
  if (raw) *raw = nlohmann::json::parse(text, nullptr, false);
  return parse_schedule(text, path);
}

// ---- outputs ----

fs::path output_dir(const Config& cfg) {
  fs::path d = cfg.str("output-dir");
  if (d.empty()) d = ".";
  fs::create_directories(d);
  return d;
}

void write_json(const fs::path& path, const ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

ordered_json with_config(const Config& cfg, ordered_json body) {
  ordered_json out;
  out["config"] = cfg.echo();
  for (auto& [k, v] : body.items()) out[k] = std::move(v);
  return out;
}

ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json flows_json(const std::vector<PassengerFlow>& flows) {
  ordered_json arr = ordered_json::array();
  for (const auto& f : flows) arr.push_back({{"origin", f.origin}, {"destination", f.destination}, {"period", f.period}});
  return arr;
}

// ---- model preparation shared by solve / export-lp / import-solution ----

struct Prepared {
  TransitInstance instance;
  ModelParams params;
  BuiltModel built;
  std::optional<RobustCounterpartModel> rc;
  ordered_json reduction = nullptr;

  const BuiltModel& model() const { return rc ? rc->built : built; }
};

Prepared prepare(const Config& cfg) {
  Prepared p;
  p.instance = instance_input(cfg);
  p.params = model_params(cfg, p.instance);
  const auto kind = parse_model_kind(cfg.str("model"));
  if (kind != ModelKind::kRobust && cfg.has("gamma-u")) throw UsageError("--gamma-u only applies to --model robust");
  if (kind != ModelKind::kRobust && cfg.has("epsilon")) throw UsageError("--epsilon only applies to --model robust");
  switch (kind) {
    case ModelKind::kNominal:
    case ModelKind::kCrowding: {
      if (kind == ModelKind::kNominal && cfg.has("stats") && cfg.paths("scenarios").empty()) {
        const auto st = load_stats(cfg.str("stats"));
        p.built = build_nominal(p.instance, "mean", st.mean, p.params, FlowSelection{st.support()});
        break;
      }
      const auto sc = pick_scenario(cfg);
      const FlowSelection sel{reduce_positive(all_flows(p.instance), sc)};
      p.built = kind == ModelKind::kNominal ? build_nominal(p.instance, sc, p.params, sel)
                                            : build_crowding(p.instance, sc, p.params, sel);
      break;
    }
    case ModelKind::kStochastic: {
      const auto set = ScenarioSet::uniform(require_scenarios(cfg));
      p.built = build_stochastic(p.instance, set, p.params, reduce_positive(set));
      break;
    }
    case ModelKind::kRobust: {
      if (!cfg.has("gamma-u")) throw UsageError("--model robust requires --gamma-u");
      const auto st = stats_input(cfg);
      std::vector<PassengerFlow> support = reduce_positive(st);
      if (cfg.has("epsilon")) {
        const auto red = reduce_heuristic(st, cfg.num("epsilon"), p.params.big_m);
        support = red.flows;
        p.reduction = ordered_json::parse(reduction_report_json(red.report));
      }
      p.rc = build_robust_counterpart(p.instance, BudgetUncertaintySet(st, cfg.num("gamma-u"), support), p.params);
      break;
    }
  }
  return p;
}

std::string manifest_for(const Prepared& p) {
  return p.rc ? robust_manifest_json(*p.rc, p.instance) : manifest_json(p.built, p.instance);
}

ordered_json schedule_document(const Config& cfg, const Schedule& s, ordered_json solution) {
  auto doc = ordered_json::parse(schedule_to_json(s));
  ordered_json out;
  out["config"] = cfg.echo();
  out["solution"] = std::move(solution);
  for (auto& [k, v] : doc.items()) out[k] = std::move(v);
  return out;
}

// ---- commands ----

int cmd_solve(const Config& cfg, std::ostream& out) {
  const auto p = prepare(cfg);
  const auto limits = solve_limits(cfg);
  const auto& built = p.model();
  const auto sol = p.rc ? solve_robust(*p.rc, limits) : milp::solve(built.model, limits);
  if (!sol.has_values()) {
    throw SolverError(std::string("solve ended ") + milp::to_string(sol.status) + " without a solution");
  }
  const auto dir = output_dir(cfg);
  const auto schedule = extract_schedule(built, sol.values);
  const auto totals = assignment_totals(built, sol.values, 0);
  ordered_json solution = {{"status", milp::to_string(sol.status)},
                           {"objective", num(sol.objective)},
                           {"best_bound", num(sol.best_bound)},
                           {"gap", num(sol.gap)}};
  if (built.kind != ModelKind::kStochastic) {
    solution["wait_total"] = totals.wait_minutes;
    solution["in_vehicle_total"] = totals.in_vehicle_minutes;
    solution["unmet_total"] = totals.unmet;
  }
  write_json(dir / "schedule.json", schedule_document(cfg, schedule, solution));
  write_json(dir / "manifest.json", with_config(cfg, {{"manifest", ordered_json::parse(manifest_for(p))},
                                                      {"reduction", p.reduction}}));
  write_json(dir / "solve_log.json", with_config(cfg, {{"status", milp::to_string(sol.status)},
                                                       {"objective", num(sol.objective)},
                                                       {"best_bound", num(sol.best_bound)},
                                                       {"gap", num(sol.gap)},
                                                       {"nodes", sol.nodes},
                                                       {"lp_iterations", sol.lp_iterations},
                                                       {"wall_seconds", sol.wall_seconds}}));
  out << ordered_json({{"command", "solve"}, {"status", milp::to_string(sol.status)}, {"objective", num(sol.objective)},
                       {"gap", num(sol.gap)}, {"dispatches", schedule.dispatches.size()}})
             .dump()
      << "\n";
  return 0;
}

int cmd_export_lp(const Config& cfg, std::ostream& out) {
  const auto p = prepare(cfg);
  if (p.rc && !p.rc->materialized) {
    throw SolverError("the robust counterpart has " + std::to_string(p.rc->aux_count) +
                      " auxiliary variables and was not materialized");
  }
  const auto lp = milp::export_model(p.model().model);
  const auto dir = output_dir(cfg);
  write_text_file(dir / "model.lp", lp.text);
  write_json(dir / "manifest.json",
             with_config(cfg, {{"manifest", ordered_json::parse(manifest_for(p))},
                               {"reduction", p.reduction},
                               {"renamed", lp.renamed}}));
  out << ordered_json({{"command", "export-lp"},
                       {"variables", p.model().model.num_variables()},
                       {"rows", p.model().model.num_constraints()}})
             .dump()
      << "\n";
  return 0;
}

int cmd_import_solution(const Config& cfg, std::ostream& out) {
  const auto p = prepare(cfg);
  const auto& built = p.model();
  const auto lp = milp::export_model(built.model);
  std::ifstream in(cfg.require_str("solution"));
  if (!in) throw InvalidInput("cannot open " + cfg.str("solution"));
  const auto by_name = milp::read_solution_csv(in, lp.renamed);
  std::vector<double> values(built.model.num_variables(), 0.0);
  for (const auto& [name, v] : by_name) {
    const auto j = built.model.find_variable(name);
    if (!j) throw InvalidInput("solution names unknown variable '" + name + "'");
    values[*j] = v;
  }
  const auto report = milp::check_solution(built.model, values);
  const auto dir = output_dir(cfg);
  const double objective = built.model.objective_value(values);
  ordered_json violations = ordered_json::array();
  for (const auto& v : report.violations) violations.push_back(v.name + ": " + milp::to_string(v.kind));
  write_json(dir / "import_log.json",
             with_config(cfg, {{"objective", num(objective)}, {"feasible", report.empty()}, {"violations", violations}}));
  if (!report.empty()) throw InvalidInput("imported solution violates the model: " + report.summary());
  const auto schedule = extract_schedule(built, values);
  write_json(dir / "schedule.json",
             schedule_document(cfg, schedule, {{"status", "imported"}, {"objective", num(objective)}, {"gap", nullptr}}));
  out << ordered_json({{"command", "import-solution"}, {"objective", num(objective)},
                       {"dispatches", schedule.dispatches.size()}})
             .dump()
      << "\n";
  return 0;
}

int cmd_evaluate(const Config& cfg, std::ostream& out) {
  const auto inst = instance_input(cfg);
  const auto params = model_params(cfg, inst);
  const auto schedule = schedule_input(cfg.require_str("schedule"));
  const auto scenarios = require_scenarios(cfg);
  const auto reports = evaluate_schedule(schedule, scenarios, inst, params, cfg.workers());
  const auto dir = output_dir(cfg);
  write_json(dir / "evaluation.json", with_config(cfg, {{"reports", ordered_json::parse(evaluation_json(reports))}}));
  write_text_file(dir / "evaluation.csv", evaluation_csv(reports));
  out << ordered_json({{"command", "evaluate"}, {"scenarios", reports.size()}}).dump() << "\n";
  return 0;
}

int cmd_compare(const Config& cfg, std::ostream& out) {
  const auto inst = instance_input(cfg);
  const auto params = model_params(cfg, inst);
  nlohmann::json a_raw;
  const auto a = schedule_input(cfg.require_str("a"), &a_raw);
  const auto b = schedule_input(cfg.require_str("b"));
  const auto scenarios = require_scenarios(cfg);
  const auto ea = evaluate_schedule(a, scenarios, inst, params, cfg.workers());
  const auto eb = evaluate_schedule(b, scenarios, inst, params, cfg.workers());
  BudgetTableRow row;
  row.versus_compare = compare_evaluations(ea, eb);
  row.versus_baseline = row.versus_compare;
  ordered_json body = {{"versus_b", ordered_json::parse(comparison_json(row.versus_compare))}};
  const auto dir = output_dir(cfg);
  write_text_file(dir / "comparison.csv", comparison_csv(row.versus_compare));
  if (cfg.has("baseline")) {
    const auto base = schedule_input(cfg.str("baseline"));
    row.versus_baseline = compare_evaluations(ea, evaluate_schedule(base, scenarios, inst, params, cfg.workers()));
    body["versus_baseline"] = ordered_json::parse(comparison_json(row.versus_baseline));
    write_text_file(dir / "comparison_baseline.csv", comparison_csv(row.versus_baseline));
  }
  // Table row label and gap come from the candidate's own solve when known.
  row.gamma_u = 0.0;
  row.gap = std::numeric_limits<double>::quiet_NaN();
  if (cfg.has("gamma-u")) {
    row.gamma_u = cfg.num("gamma-u");
  } else if (a_raw.is_object() && a_raw.contains("config") && a_raw["config"].contains("gamma-u") &&
             a_raw["config"]["gamma-u"].is_number()) {
    row.gamma_u = a_raw["config"]["gamma-u"].get<double>();
  }
  if (a_raw.is_object() && a_raw.contains("solution") && a_raw["solution"].contains("gap") &&
      a_raw["solution"]["gap"].is_number()) {
    row.gap = a_raw["solution"]["gap"].get<double>();
  }
  write_text_file(dir / "budget_table.csv", budget_table_csv({row}));
  write_json(dir / "comparison.json", with_config(cfg, std::move(body)));
  out << budget_table_line(row) << "\n";
  return 0;
}

std::vector<double> default_grid(const std::string& parameter) {
  std::vector<double> g;
  if (parameter == "gamma") {
    for (int i = 0; i <= 20; ++i) g.push_back(i / 10.0);
  } else if (parameter == "omega") {
    g = {0, 0.25, 0.5, 1, 2, 4, 8};
  } else {
    for (int i = 0; i <= 10; ++i) g.push_back(i);
  }
  return g;
}

int cmd_sweep(const Config& cfg, std::ostream& out) {
  const auto parameter = cfg.require_str("parameter");
  if (parameter != "gamma" && parameter != "omega" && parameter != "gamma-u") {
    throw UsageError("--parameter must be gamma, omega or gamma-u");
  }
  const auto inst = instance_input(cfg);
  const auto params = model_params(cfg, inst);
  const auto limits = solve_limits(cfg);
  auto grid = cfg.doubles("values");
  if (grid.empty()) grid = default_grid(parameter);
  Sweep sw;
  if (parameter == "gamma-u") {
    const auto st = stats_input(cfg);
    std::optional<std::vector<PassengerFlow>> support;
    if (cfg.has("epsilon")) support = reduce_heuristic(st, cfg.num("epsilon"), params.big_m).flows;
    sw = gamma_u_sweep(inst, st, params, grid, support, limits, cfg.workers());
  } else {
    const auto sc = pick_scenario(cfg);
    sw = parameter == "gamma" ? gamma_sweep(inst, sc, params, grid, limits, cfg.workers())
                              : omega_sweep(inst, sc, params, grid, limits, cfg.workers());
  }
  const auto dir = output_dir(cfg);
  write_json(dir / "sweep.json", with_config(cfg, {{"sweep", ordered_json::parse(sweep_json(sw))}}));
  write_text_file(dir / "sweep.csv", sweep_csv(sw));
  write_text_file(dir / "sweep.svg", sweep_svg(sw));
  std::size_t failed = 0;
  for (const auto& r : sw.rows) failed += !r.ok;
  out << ordered_json({{"command", "sweep"}, {"points", sw.rows.size()}, {"failed", failed}, {"violations", sw.violations}})
             .dump()
      << "\n";
  return 0;
}

int cmd_reduce(const Config& cfg, std::ostream& out) {
  const auto st = stats_input(cfg);
  const double big_m = cfg.num("big-m");
  const auto red = reduce_heuristic(st, cfg.num("epsilon"), big_m);
  const auto dir = output_dir(cfg);
  ordered_json body = {{"report", ordered_json::parse(reduction_report_json(red.report))},
                       {"default_epsilon", default_epsilon(static_cast<std::size_t>(std::max(1LL, cfg.integer("days"))))},
                       {"kept_flows", flows_json(red.flows)}};
  const auto grid = cfg.doubles("epsilon-grid");
  if (!grid.empty()) {
    std::ostringstream csv;
    csv << "epsilon,f_epsilon,lambda_bound\n";
    ordered_json curve = ordered_json::array();
    for (const auto& c : reduction_curve(st, grid, big_m)) {
      csv << format_value(c.epsilon) << "," << c.f_epsilon << "," << format_value(c.lambda_bound) << "\n";
      curve.push_back({{"epsilon", c.epsilon}, {"f_epsilon", c.f_epsilon}, {"lambda_bound", c.lambda_bound}});
    }
    body["curve"] = std::move(curve);
    write_text_file(dir / "reduction_curve.csv", csv.str());
  }
  FlowStats kept;
  for (const auto& f : red.flows) {
    kept.mean[f] = st.mean_of(f);
    kept.std[f] = st.std_of(f);
  }
  save_stats(kept, dir / "reduced_stats.csv");
  write_json(dir / "reduction.json", with_config(cfg, std::move(body)));
  out << reduction_report_json(red.report);
  return 0;
}

int cmd_gen_demand(const Config& cfg, std::ostream& out) {
  const auto st = stats_input(cfg);
  const double beta = cfg.num("beta");
  const long long seed = cfg.integer("seed");
  const long long count = cfg.integer("count");
  if (count < 1) throw UsageError("--count must be positive");
  if (!(beta >= 0)) throw UsageError("--beta must be nonnegative");
  std::vector<DemandScenario> scenarios;
  ordered_json listing = ordered_json::array();
  for (long long i = 0; i < count; ++i) {
    // Scenario i draws on seed + i so a longer run extends a shorter one.
    const auto s = static_cast<std::uint64_t>(seed) + static_cast<std::uint64_t>(i);
    scenarios.push_back(synth_demand(st, beta, s, "g" + std::to_string(i + 1)));
    listing.push_back({{"id", scenarios.back().id}, {"seed", s}, {"total", scenarios.back().total()}});
  }
  const auto dir = output_dir(cfg);
  save_scenarios(scenarios, dir / "scenarios.csv");
  write_json(dir / "gen_demand.json", with_config(cfg, {{"scenarios", listing}}));
  out << ordered_json({{"command", "gen-demand"}, {"scenarios", scenarios.size()}}).dump() << "\n";
  return 0;
}

int dispatch(const Config& cfg, std::ostream& out) {
  const auto& c = cfg.command();
  if (c == "solve") return cmd_solve(cfg, out);
  if (c == "evaluate") return cmd_evaluate(cfg, out);
  if (c == "compare") return cmd_compare(cfg, out);
  if (c == "sweep") return cmd_sweep(cfg, out);
  if (c == "reduce") return cmd_reduce(cfg, out);
  if (c == "gen-demand") return cmd_gen_demand(cfg, out);
  if (c == "export-lp") return cmd_export_lp(cfg, out);
  if (c == "import-solution") return cmd_import_solution(cfg, out);
  throw UsageError("unknown command " + c);
}

int report_error(std::ostream& err, const std::string& command, const std::string& kind, const std::string& message,
                 int code) {
  err << ordered_json({{"error", {{"kind", kind}, {"command", command}, {"message", message}}}}).dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transit frequency setting: build, solve and evaluate dispatch schedules", "tfsp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "build and solve a model, write schedule, manifest and solver log"},
      {"evaluate", "assign passengers to a fixed schedule for every scenario"},
      {"compare", "paired comparison of two schedules (and a baseline) over scenarios"},
      {"sweep", "solve over a grid of gamma, omega or gamma-u"},
      {"reduce", "apply the mean-demand threshold reduction and report its loss bound"},
      {"gen-demand", "draw Poisson demand scenarios from flow statistics"},
      {"export-lp", "write the model in LP format for an external solver"},
      {"import-solution", "read an external solution, check it and extract the schedule"},
  };
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> raw;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    subs[name] = sub;
    sub->add_option("--config", config_paths[name], "JSON file with settings (flags take precedence)");
    for (const auto& k : keys_for(name)) {
      const auto& info = key_info(k);
      auto* opt = sub->add_option("--" + k, raw[name][k], info.help);
      if (info.kind == Kind::kDoubles) opt->delimiter(',');
      if (info.kind == Kind::kPaths || info.kind == Kind::kDoubles) {
        opt->expected(1, -1);
      } else {
        opt->expected(1);
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
      options[name][k] = opt;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string command;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) command = name;
    }
    return report_error(err, command, "usage_error", e.what(), 2);
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  try {
    const auto cfg = resolve(command, options[command], raw[command], config_paths[command]);
    return dispatch(cfg, out);
  } catch (const UsageError& e) {
    return report_error(err, command, e.kind(), e.what(), 2);
  } catch (const SolverError& e) {
    return report_error(err, command, e.kind(), e.what(), 4);
  } catch (const Error& e) {
    return report_error(err, command, e.kind(), e.what(), 3);
  } catch (const nlohmann::json::exception& e) {
    return report_error(err, command, "parse_error", e.what(), 3);
  } catch (const fs::filesystem_error& e) {
    return report_error(err, command, "io_error", e.what(), 3);
  } catch (const std::exception& e) {
    return report_error(err, command, "internal_error", e.what(), 1);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace tfsp::cli
