#include "tfsp/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <json.hpp>

#include "tfsp/error.hpp"

namespace tfsp {

namespace {

std::string tag(const BuiltModel& built, int scenario) {
  if (built.kind != ModelKind::kStochastic) return "";
  return "{" + built.index.scenario_ids.at(scenario) + "}";
}

std::string flow_args(const PassengerFlow& f) {
  return f.origin + "," + f.destination + "," + std::to_string(f.period);
}

std::vector<PassengerFlow> resolve_flows(const TransitInstance& instance, const FlowSelection& selection) {
  if (!selection.flows) return all_flows(instance);
  std::vector<PassengerFlow> flows = *selection.flows;
  std::sort(flows.begin(), flows.end());
  flows.erase(std::unique(flows.begin(), flows.end()), flows.end());
  for (const auto& f : flows) validate_flow(f, instance);
  return flows;
}

milp::Sense to_milp(RowSense s) {
  switch (s) {
    case RowSense::kLessEqual: return milp::Sense::kLessEqual;
    case RowSense::kGreaterEqual: return milp::Sense::kGreaterEqual;
    case RowSense::kEqual: return milp::Sense::kEqual;
  }
  return milp::Sense::kLessEqual;
}

// Adds unmet variables and conservation rows sum(lambda) + unmet = u.
void add_conservation(const ModelParams& params, int scenario, double weight,
                      const std::map<PassengerFlow, std::vector<int>>& per_flow, BuiltModel& built) {
  auto& idx = built.index;
  auto& m = built.model;
  auto& unmet = idx.unmet.at(scenario);
  const std::string t = tag(built, scenario);
  for (const auto& f : idx.flows.at(scenario)) {
    const double u = idx.demand.at(scenario).at(f);
    const int eta = m.add_continuous("unmet" + t + "(" + flow_args(f) + ")", 0.0, u, weight * params.big_m);
    unmet.emplace(f, eta);
    std::vector<milp::Term> terms;
    auto it = per_flow.find(f);
    if (it != per_flow.end()) {
      for (int k : it->second) terms.push_back({idx.lambdas[k].var, 1.0});
    }
    terms.push_back({eta, 1.0});
    m.add_constraint("cons" + t + "(" + flow_args(f) + ")", std::move(terms), milp::Sense::kEqual, u);
    ++idx.row_counts["conservation"];
  }
}

std::map<PassengerFlow, double> as_map(const DemandScenario& scenario) {
  std::map<PassengerFlow, double> out;
  for (const auto& [f, c] : scenario.counts) out.emplace(f, static_cast<double>(c));
  return out;
}

}  // namespace

void begin_scenario(BuiltModel& built, const std::string& id, std::vector<PassengerFlow> flows,
                    const std::map<PassengerFlow, double>& counts) {
  auto& idx = built.index;
  idx.scenario_ids.push_back(id);
  std::map<PassengerFlow, double> demand;
  for (const auto& f : flows) {
    auto it = counts.find(f);
    demand.emplace(f, it == counts.end() ? 0.0 : it->second);
  }
  idx.flows.push_back(std::move(flows));
  idx.demand.push_back(std::move(demand));
  idx.unmet.emplace_back();
}

void add_schedule_block(const TransitInstance& instance, const ModelParams& params, BuiltModel& built) {
  auto& m = built.model;
  auto& idx = built.index;
  const auto& patterns = instance.line.patterns();
  const auto& vehicles = instance.vehicle_types;
  const int T = instance.num_periods();
  for (const auto& p : patterns) idx.y.emplace(p.id(), m.add_binary("y(" + p.id() + ")"));
  for (const auto& p : patterns) {
    for (const auto& v : vehicles) {
      for (int t = 1; t <= T; ++t) {
        const std::string args = p.id() + "," + v.id + "," + std::to_string(t);
        const int x = m.add_binary("x(" + args + ")");
        idx.x.emplace(DispatchKey{p.id(), v.id, t}, x);
        m.add_constraint("link(" + args + ")", {{x, 1.0}, {idx.y.at(p.id()), -1.0}}, milp::Sense::kLessEqual, 0.0);
        ++idx.row_counts["link"];
      }
    }
  }
  if (vehicles.size() >= 2) {
    for (const auto& p : patterns) {
      for (int t = 1; t <= T; ++t) {
        std::vector<milp::Term> terms;
        for (const auto& v : vehicles) terms.push_back({idx.x.at({p.id(), v.id, t}), 1.0});
        m.add_constraint("single(" + p.id() + "," + std::to_string(t) + ")", std::move(terms),
                         milp::Sense::kLessEqual, 1.0);
        ++idx.row_counts["single_type"];
      }
    }
  }
  {
    std::vector<milp::Term> terms;
    for (const auto& p : patterns) terms.push_back({idx.y.at(p.id()), 1.0});
    m.add_constraint("sparsity", std::move(terms), milp::Sense::kLessEqual, instance.line.max_active_patterns());
    ++idx.row_counts["sparsity"];
  }
  if (params.budget_mode == BudgetMode::kTotal) {
    std::vector<milp::Term> terms;
    for (const auto& [key, x] : idx.x) {
      const auto& v = vehicles[*instance.vehicle_index(key.vehicle)];
      const double c = v.cost_per_pattern.at(key.pattern);
      if (c != 0.0) terms.push_back({x, c});
    }
    m.add_constraint("budget", std::move(terms), milp::Sense::kLessEqual, params.budget);
    ++idx.row_counts["budget"];
  } else {
    for (const auto& v : vehicles) {
      std::vector<milp::Term> terms;
      for (const auto& p : patterns) {
        for (int t = 1; t <= T; ++t) terms.push_back({idx.x.at({p.id(), v.id, t}), 1.0});
      }
      m.add_constraint("budget(" + v.id + ")", std::move(terms), milp::Sense::kLessEqual,
                       params.vehicle_budgets.at(v.id));
      ++idx.row_counts["budget"];
    }
  }
  for (const auto& row : instance.extra_rows) {
    std::vector<milp::Term> terms;
    for (const auto& t : row.terms) terms.push_back({idx.x.at({t.pattern, t.vehicle, t.period}), t.coef});
    m.add_constraint("extra(" + row.name + ")", std::move(terms), to_milp(row.sense), row.rhs);
    ++idx.row_counts["extra"];
  }
}

std::map<PassengerFlow, std::vector<int>> add_lambda_block(const TransitInstance& instance, const ModelParams& params,
                                                           const std::vector<PassengerFlow>& flows,
                                                           const std::map<PassengerFlow, double>& upper,
                                                           double weight, int scenario, BuiltModel& built) {
  auto& m = built.model;
  auto& idx = built.index;
  const auto& patterns = instance.line.patterns();
  const int T = instance.num_periods();
  const std::string t = tag(built, scenario);
  std::map<PassengerFlow, std::vector<int>> per_flow;
  for (const auto& f : flows) {
    const double u = upper.at(f);
    auto& list = per_flow[f];
    for (std::size_t pi = 0; pi < patterns.size(); ++pi) {
      const auto& p = patterns[pi];
      if (!p.serves_pair(f.origin, f.destination)) continue;
      const auto tau0 = earliest_departure(f, p, instance.grid);
      if (!tau0) continue;
      const double phi = cumulative_time(p, f.origin, f.destination).minutes();
      for (std::size_t vi = 0; vi < instance.vehicle_types.size(); ++vi) {
        const auto& v = instance.vehicle_types[vi];
        for (int tau = *tau0; tau <= T; ++tau) {
          const double w = wait_time(f, p, tau, instance.grid).minutes();
          const std::string name =
              "lam" + t + "(" + flow_args(f) + "," + p.id() + "," + v.id + "," + std::to_string(tau) + ")";
          const int var = m.add_continuous(name, 0.0, u, weight * (w + params.gamma * phi));
          list.push_back(static_cast<int>(idx.lambdas.size()));
          idx.lambdas.push_back({var, scenario, f, pi, vi, tau, w, phi});
        }
      }
    }
  }
  return per_flow;
}

void add_capacity_rows(const TransitInstance& instance, const ModelParams& params, int scenario, bool crowding,
                       double weight, BuiltModel& built) {
  auto& m = built.model;
  auto& idx = built.index;
  const auto& patterns = instance.line.patterns();
  const std::string tg = tag(built, scenario);
  // Group this scenario's lambdas by vehicle trip (p, v, tau).
  std::map<std::tuple<std::size_t, std::size_t, int>, std::vector<int>> trips;
  for (std::size_t k = 0; k < idx.lambdas.size(); ++k) {
    const auto& l = idx.lambdas[k];
    if (l.scenario == scenario) trips[{l.pattern, l.vehicle, l.tau}].push_back(static_cast<int>(k));
  }
  for (const auto& [key, members] : trips) {
    const auto [pi, vi, tau] = key;
    const auto& p = patterns[pi];
    const auto& v = instance.vehicle_types[vi];
    const int x = idx.x.at({p.id(), v.id, tau});
    for (std::size_t s = 0; s + 1 < p.size(); ++s) {
      LoadRow load{-1, scenario, pi, vi, s, tau, -1, {}};
      std::vector<milp::Term> terms;
      for (int k : members) {
        const auto& l = idx.lambdas[k];
        if (p.position(l.flow.origin) <= s && p.position(l.flow.destination) > s) {
          terms.push_back({l.var, 1.0});
          load.lambdas.push_back(k);
        }
      }
      if (terms.empty()) continue;
      const std::string args = p.id() + "," + v.id + "," + p.stop_ids()[s] + "," + std::to_string(tau);
      if (crowding) {
        const double phi = p.segments()[s].minutes();
        load.z = m.add_binary("z" + tg + "(" + args + ")", weight * params.omega * phi);
        terms.push_back({x, -static_cast<double>(v.seats)});
        terms.push_back({load.z, -static_cast<double>(v.max_capacity - v.seats)});
        m.add_constraint("zlink" + tg + "(" + args + ")", {{load.z, 1.0}, {x, -1.0}}, milp::Sense::kLessEqual, 0.0);
        ++idx.row_counts["crowding_link"];
      } else {
        terms.push_back({x, -static_cast<double>(v.max_capacity)});
      }
      load.row = m.add_constraint("cap" + tg + "(" + args + ")", std::move(terms), milp::Sense::kLessEqual, 0.0);
      ++idx.row_counts["capacity"];
      idx.loads.push_back(std::move(load));
    }
  }
}

namespace {

BuiltModel build_single(const TransitInstance& instance, const std::string& id,
                        const std::map<PassengerFlow, double>& demand, const ModelParams& params,
                        const FlowSelection& selection, bool crowding) {
  instance.validate();
  validate_params(instance, params);
  for (const auto& [f, u] : demand) {
    validate_flow(f, instance);
    if (!(u >= 0.0) || !std::isfinite(u)) throw InvalidInput("demand of " + to_string(f) + " must be finite and nonnegative");
  }
  BuiltModel built;
  built.kind = crowding ? ModelKind::kCrowding : ModelKind::kNominal;
  built.params = params;
  add_schedule_block(instance, params, built);
  begin_scenario(built, id, resolve_flows(instance, selection), demand);
  const auto per_flow = add_lambda_block(instance, params, built.index.flows[0], built.index.demand[0], 1.0, 0, built);
  add_conservation(params, 0, 1.0, per_flow, built);
  add_capacity_rows(instance, params, 0, crowding, 1.0, built);
  return built;
}

}  // namespace

BuiltModel build_nominal(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                         const FlowSelection& selection) {
  validate_scenario(scenario, instance);
  return build_single(instance, scenario.id, as_map(scenario), params, selection, false);
}

BuiltModel build_nominal(const TransitInstance& instance, const std::string& id,
                         const std::map<PassengerFlow, double>& demand, const ModelParams& params,
                         const FlowSelection& selection) {
  return build_single(instance, id, demand, params, selection, false);
}

BuiltModel build_crowding(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                          const FlowSelection& selection) {
  if (!(params.omega >= 0.0)) throw InvalidInput("omega must be nonnegative");
  validate_scenario(scenario, instance);
  return build_single(instance, scenario.id, as_map(scenario), params, selection, true);
}

BuiltModel build_stochastic(const TransitInstance& instance, const ScenarioSet& scenarios, const ModelParams& params,
                            const std::vector<FlowSelection>& per_scenario) {
  instance.validate();
  validate_params(instance, params);
  scenarios.validate();
  if (!per_scenario.empty() && per_scenario.size() != scenarios.size()) {
    throw InvalidInput("one flow selection per scenario required");
  }
  BuiltModel built;
  built.kind = ModelKind::kStochastic;
  built.params = params;
  add_schedule_block(instance, params, built);
  for (std::size_t e = 0; e < scenarios.size(); ++e) {
    const auto& sc = scenarios.scenarios[e];
    validate_scenario(sc, instance);
    const int ei = static_cast<int>(e);
    const double pe = scenarios.probabilities[e];
    begin_scenario(built, sc.id, resolve_flows(instance, per_scenario.empty() ? FlowSelection{} : per_scenario[e]),
                   as_map(sc));
    const auto per_flow =
        add_lambda_block(instance, params, built.index.flows[e], built.index.demand[e], pe, ei, built);
    add_conservation(params, ei, pe, per_flow, built);
    add_capacity_rows(instance, params, ei, false, pe, built);
  }
  return built;
}

std::string manifest_json(const BuiltModel& built, const TransitInstance& instance) {
  using nlohmann::ordered_json;
  const auto& idx = built.index;
  ordered_json doc;
  doc["model"] = to_string(built.kind);
  doc["variables"] = built.model.num_variables();
  doc["binaries"] = built.model.num_binaries();
  doc["constraints"] = built.model.num_constraints();
  ordered_json families;
  families["x"] = idx.x.size();
  families["y"] = idx.y.size();
  families["lam"] = idx.lambdas.size();
  std::size_t unmet = 0;
  for (const auto& u : idx.unmet) unmet += u.size();
  families["unmet"] = unmet;
  std::size_t z = 0;
  for (const auto& l : idx.loads) z += l.z >= 0;
  if (built.kind == ModelKind::kCrowding) families["z"] = z;
  doc["variable_families"] = std::move(families);
  ordered_json rows = ordered_json::object();
  for (const auto& [k, n] : idx.row_counts) rows[k] = n;
  doc["row_families"] = std::move(rows);
  ordered_json scen = ordered_json::array();
  for (std::size_t e = 0; e < idx.scenario_ids.size(); ++e) {
    scen.push_back({{"id", idx.scenario_ids[e]}, {"flows", idx.flows[e].size()}});
  }
  doc["scenarios"] = std::move(scen);
  ordered_json catalog = ordered_json::array();
  for (const auto& l : idx.lambdas) {
    ordered_json e;
    e["var"] = built.model.variable(l.var).name;
    if (built.kind == ModelKind::kStochastic) e["scenario"] = idx.scenario_ids[l.scenario];
    e["o"] = l.flow.origin;
    e["d"] = l.flow.destination;
    e["t"] = l.flow.period;
    e["p"] = instance.line.patterns()[l.pattern].id();
    e["v"] = instance.vehicle_types[l.vehicle].id;
    e["tau"] = l.tau;
    catalog.push_back(std::move(e));
  }
  doc["lambda_catalog"] = std::move(catalog);
  return doc.dump(2) + "\n";
}

Schedule extract_schedule(const BuiltModel& built, const std::vector<double>& values) {
  auto read = [&](int var) {
    const double v = values.at(var);
    if (std::abs(v - std::round(v)) > milp::kIntegralityTol) {
      throw InvalidInput("binary " + built.model.variable(var).name + " is fractional (" + std::to_string(v) + ")");
    }
    return v > 0.5;
  };
  Schedule s;
  for (const auto& [key, var] : built.index.x) {
    if (read(var)) s.dispatches.push_back(key);
  }
  for (const auto& [pid, var] : built.index.y) {
    if (read(var)) s.active_patterns.push_back(pid);
  }
  s.normalize();
  return s;
}

void fix_schedule(BuiltModel& built, const Schedule& schedule) {
  for (const auto& d : schedule.dispatches) {
    if (!built.index.x.count(d)) {
      throw InvalidInput("schedule dispatch " + d.pattern + "/" + d.vehicle + "/" + std::to_string(d.period) +
                         " is not part of the model");
    }
  }
  for (const auto& a : schedule.active_patterns) {
    if (!built.index.y.count(a)) throw InvalidInput("schedule names unknown pattern " + a);
  }
  for (const auto& [key, var] : built.index.x) {
    const double v = schedule.dispatched(key.pattern, key.vehicle, key.period) ? 1.0 : 0.0;
    built.model.set_bounds(var, v, v);
  }
  for (const auto& [pid, var] : built.index.y) {
    const double v = schedule.active(pid) ? 1.0 : 0.0;
    built.model.set_bounds(var, v, v);
  }
}

AssignmentTotals assignment_totals(const BuiltModel& built, const std::vector<double>& values, int scenario) {
  AssignmentTotals t;
  for (const auto& l : built.index.lambdas) {
    if (l.scenario != scenario) continue;
    const double v = values.at(l.var);
    t.served += v;
    t.wait_minutes += l.wait_minutes * v;
    t.in_vehicle_minutes += l.in_vehicle_minutes * v;
  }
  if (scenario < static_cast<int>(built.index.demand.size())) {
    for (const auto& [f, u] : built.index.demand[scenario]) t.demand += u;
    if (built.index.unmet[scenario].empty()) {
      // unmet was substituted out (robust model): demand minus served.
      t.unmet = std::max(0.0, t.demand - t.served);
    } else {
      for (const auto& [f, var] : built.index.unmet[scenario]) t.unmet += values.at(var);
    }
  }
  return t;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kNominal: return "nominal";
    case ModelKind::kCrowding: return "crowding";
    case ModelKind::kStochastic: return "stochastic";
    case ModelKind::kRobust: return "robust";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "nominal") return ModelKind::kNominal;
  if (text == "crowding") return ModelKind::kCrowding;
  if (text == "stochastic") return ModelKind::kStochastic;
  if (text == "robust") return ModelKind::kRobust;
  throw InvalidInput("unknown model kind " + text);
}

}  // namespace tfsp
