#include "tfsp/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "tfsp/error.hpp"
#include "tfsp/ingest.hpp"
#include "tfsp/milp/simplex.hpp"
#include "tfsp/parallel.hpp"

namespace tfsp {

namespace {

constexpr double kLoadTol = 1e-9;

// Budget, sparsity and agency rows do not apply when a schedule is only
// evaluated; an existing schedule may well exceed the planning budget.
struct Relaxed {
  TransitInstance instance;
  ModelParams params;
};

Relaxed relax_for_evaluation(const TransitInstance& instance, const ModelParams& params) {
  Relaxed r{instance, params};
  r.instance.line = TransitLine(instance.line.stops(), instance.line.patterns(),
                                static_cast<int>(instance.line.patterns().size()));
  r.instance.extra_rows.clear();
  double total = 0.0;
  for (const auto& v : instance.vehicle_types) {
    for (const auto& [p, c] : v.cost_per_pattern) total += std::abs(c) * instance.num_periods();
  }
  r.params.budget_mode = BudgetMode::kTotal;
  r.params.budget = total + 1.0;
  return r;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

EvaluationReport summarize_assignment(const BuiltModel& built, const std::vector<double>& values,
                                      const TransitInstance& instance, const Schedule& schedule,
                                      std::vector<Boarding>* boardings, std::vector<SegmentLoad>* loads) {
  EvaluationReport rep;
  if (!built.index.scenario_ids.empty()) rep.scenario_id = built.index.scenario_ids[0];
  const auto totals = assignment_totals(built, values, 0);
  rep.served = totals.served;
  rep.unmet = totals.unmet;
  rep.demand = totals.demand;
  if (totals.served > 1e-12) {
    rep.avg_wait_minutes = totals.wait_minutes / totals.served;
    rep.avg_in_vehicle_minutes = totals.in_vehicle_minutes / totals.served;
  }
  rep.unsatisfied_fraction = totals.demand > 0.0 ? totals.unmet / totals.demand : 0.0;
  rep.total_objective = built.model.objective_value(values);

  const auto& patterns = instance.line.patterns();
  if (boardings) {
    for (const auto& l : built.index.lambdas) {
      if (l.scenario != 0) continue;
      const double v = values.at(l.var);
      if (v <= kLoadTol) continue;
      boardings->push_back({l.flow, patterns[l.pattern].id(), instance.vehicle_types[l.vehicle].id, l.tau, v,
                            l.wait_minutes, l.in_vehicle_minutes});
    }
  }

  std::map<std::tuple<std::size_t, std::size_t, int, std::size_t>, double> load_at;
  for (const auto& row : built.index.loads) {
    if (row.scenario != 0) continue;
    double load = 0.0;
    for (int k : row.lambdas) load += values.at(built.index.lambdas[k].var);
    load_at[{row.pattern, row.vehicle, row.tau, row.stop_pos}] = load;
  }
  std::map<std::string, double> crowded_minutes, running_minutes;
  for (const auto& p : patterns) {
    crowded_minutes[p.id()] = 0.0;
    running_minutes[p.id()] = 0.0;
  }
  for (const auto& d : schedule.dispatches) {
    const auto pi = *instance.line.pattern_index(d.pattern);
    const auto vi = *instance.vehicle_index(d.vehicle);
    const auto& p = patterns[pi];
    const auto& v = instance.vehicle_types[vi];
    for (std::size_t s = 0; s + 1 < p.size(); ++s) {
      auto it = load_at.find({pi, vi, d.period, s});
      const double load = it == load_at.end() ? 0.0 : it->second;
      const double minutes = p.segments()[s].minutes();
      running_minutes[p.id()] += minutes;
      if (load > v.seats + kLoadTol) crowded_minutes[p.id()] += minutes;
      if (loads) loads->push_back({p.id(), v.id, d.period, p.stop_ids()[s], load, v.seats, v.max_capacity, minutes});
    }
  }
  for (const auto& [pid, run] : running_minutes) {
    rep.crowded_time_fraction[pid] = run > 0.0 ? crowded_minutes[pid] / run : 0.0;
  }
  return rep;
}

AssignmentResult assign_passengers(const Schedule& schedule, const DemandScenario& scenario,
                                   const TransitInstance& instance, const ModelParams& params) {
  validate_scenario(scenario, instance);
  const auto relaxed = relax_for_evaluation(instance, params);
  Schedule s = schedule;
  s.normalize();
  const auto problems = check_schedule(s, relaxed.instance, relaxed.params);
  if (!problems.empty()) {
    std::string msg = "schedule is not valid:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw InvalidInput(msg);
  }
  std::vector<PassengerFlow> flows;
  for (const auto& [f, c] : scenario.counts) {
    if (c > 0) flows.push_back(f);
  }
  auto built = build_nominal(relaxed.instance, scenario, relaxed.params, FlowSelection{flows});
  fix_schedule(built, s);
  const auto lp = milp::solve_lp(built.model);
  if (lp.status != milp::LpStatus::kOptimal) {
    throw SolverError(std::string("assignment LP ended ") + milp::to_string(lp.status));
  }
  AssignmentResult out;
  out.report = summarize_assignment(built, lp.values, instance, s, &out.boardings, &out.loads);
  out.report.scenario_id = scenario.id;
  return out;
}

std::vector<EvaluationReport> evaluate_schedule(const Schedule& schedule, const std::vector<DemandScenario>& scenarios,
                                                const TransitInstance& instance, const ModelParams& params,
                                                std::size_t workers) {
  std::vector<EvaluationReport> out(scenarios.size());
  parallel_for(scenarios.size(), workers,
               [&](std::size_t i) { out[i] = assign_passengers(schedule, scenarios[i], instance, params).report; });
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.scenario_id < b.scenario_id; });
  return out;
}

double decrease_pct(double a, double b) {
  if (b == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (b - a) / b;
}

ComparisonReport compare_evaluations(const std::vector<EvaluationReport>& a, const std::vector<EvaluationReport>& b) {
  if (a.empty() || b.empty()) throw InvalidInput("comparison needs at least one scenario");
  std::map<std::string, const EvaluationReport*> by_id;
  for (const auto& r : b) {
    if (!by_id.emplace(r.scenario_id, &r).second) throw InvalidInput("duplicate scenario id " + r.scenario_id);
  }
  if (by_id.size() != a.size()) throw InvalidInput("schedules were evaluated on different scenario sets");
  ComparisonReport rep;
  std::set<std::string> seen;
  for (const auto& ra : a) {
    auto it = by_id.find(ra.scenario_id);
    if (it == by_id.end() || !seen.insert(ra.scenario_id).second) {
      throw InvalidInput("scenario " + ra.scenario_id + " is not paired");
    }
    const auto& rb = *it->second;
    rep.rows.push_back({ra.scenario_id, ra.avg_wait_minutes, rb.avg_wait_minutes,
                        decrease_pct(ra.avg_wait_minutes, rb.avg_wait_minutes), ra.avg_in_vehicle_minutes,
                        rb.avg_in_vehicle_minutes, decrease_pct(ra.avg_in_vehicle_minutes, rb.avg_in_vehicle_minutes)});
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& x, const auto& y) { return x.scenario_id < y.scenario_id; });
  std::vector<double> wa, wb, wd, ta, tb, td;
  for (const auto& r : rep.rows) {
    wa.push_back(r.wait_a);
    wb.push_back(r.wait_b);
    wd.push_back(r.wait_decrease_pct);
    ta.push_back(r.travel_a);
    tb.push_back(r.travel_b);
    td.push_back(r.travel_decrease_pct);
    const bool w = r.wait_a < r.wait_b, t = r.travel_a < r.travel_b;
    rep.wait_wins += w;
    rep.travel_wins += t;
    rep.both_wins += w && t;
  }
  rep.mean_wait_a = mean_of(wa);
  rep.mean_wait_b = mean_of(wb);
  rep.mean_wait_decrease_pct = mean_of(wd);
  rep.mean_travel_a = mean_of(ta);
  rep.mean_travel_b = mean_of(tb);
  rep.mean_travel_decrease_pct = mean_of(td);
  return rep;
}

ComparisonReport compare_schedules(const Schedule& a, const Schedule& b, const std::vector<DemandScenario>& scenarios,
                                   const TransitInstance& instance, const ModelParams& params, std::size_t workers) {
  if (scenarios.empty()) throw InvalidInput("comparison needs at least one scenario");
  return compare_evaluations(evaluate_schedule(a, scenarios, instance, params, workers),
                             evaluate_schedule(b, scenarios, instance, params, workers));
}

namespace {

void check_grid(const std::vector<double>& grid, const std::string& name) {
  if (grid.empty()) throw InvalidInput(name + " grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidInput(name + " grid must be sorted ascending");
}

void fill_row(SweepRow& row, const BuiltModel& built, const milp::MilpSolution& sol, const TransitInstance& instance) {
  row.status = milp::to_string(sol.status);
  if (!sol.has_values()) {
    row.error = "no solution (" + row.status + ")";
    return;
  }
  row.objective = sol.objective;
  row.gap = sol.gap;
  row.schedule = extract_schedule(built, sol.values);
  const auto t = assignment_totals(built, sol.values, 0);
  row.wait_total = t.wait_minutes;
  row.in_vehicle_total = t.in_vehicle_minutes;
  row.unmet_total = t.unmet;
  std::vector<SegmentLoad> loads;
  const auto rep = summarize_assignment(built, sol.values, instance, row.schedule, nullptr, &loads);
  row.avg_wait_minutes = rep.avg_wait_minutes;
  row.avg_in_vehicle_minutes = rep.avg_in_vehicle_minutes;
  row.unsatisfied_fraction = rep.unsatisfied_fraction;
  row.crowded_time_fraction = rep.crowded_time_fraction;
  for (const auto& l : loads) {
    if (l.load > l.seats + kLoadTol) row.crowded_minutes += l.minutes;
  }
  for (const auto& p : instance.line.patterns()) row.pattern_vehicles[p.id()] = 0;
  for (const auto& d : row.schedule.dispatches) ++row.pattern_vehicles[d.pattern];
  row.ok = true;
}

template <class Build>
Sweep run_sweep(const std::string& name, const std::vector<double>& grid, std::size_t workers,
                const TransitInstance& instance, Build&& build_and_solve) {
  check_grid(grid, name);
  Sweep sweep;
  sweep.parameter = name;
  sweep.rows.resize(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    auto& row = sweep.rows[i];
    row.parameter = grid[i];
    try {
      build_and_solve(grid[i], row);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  (void)instance;
  sweep.violations = sweep_violations(sweep);
  return sweep;
}

}  // namespace

Sweep gamma_sweep(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                  const std::vector<double>& gammas, const milp::SolveLimits& limits, std::size_t workers) {
  return run_sweep("gamma", gammas, workers, instance, [&](double g, SweepRow& row) {
    auto p = params;
    p.gamma = g;
    const auto built = build_nominal(instance, scenario, p);
    fill_row(row, built, milp::solve(built.model, limits), instance);
  });
}

Sweep omega_sweep(const TransitInstance& instance, const DemandScenario& scenario, const ModelParams& params,
                  const std::vector<double>& omegas, const milp::SolveLimits& limits, std::size_t workers) {
  return run_sweep("omega", omegas, workers, instance, [&](double w, SweepRow& row) {
    auto p = params;
    p.omega = w;
    const auto built = build_crowding(instance, scenario, p);
    fill_row(row, built, milp::solve(built.model, limits), instance);
  });
}

Sweep gamma_u_sweep(const TransitInstance& instance, const FlowStats& stats, const ModelParams& params,
                    const std::vector<double>& gammas_u, const std::optional<std::vector<PassengerFlow>>& support,
                    const milp::SolveLimits& limits, std::size_t workers, const RobustOptions& options) {
  return run_sweep("gamma_u", gammas_u, workers, instance, [&](double g, SweepRow& row) {
    const auto rc = build_robust_counterpart(instance, BudgetUncertaintySet(stats, g, support), params, options);
    fill_row(row, rc.built, solve_robust(rc, limits, options), instance);
  });
}

std::vector<std::string> sweep_violations(const Sweep& sweep, double tol) {
  std::vector<std::string> out;
  std::vector<const SweepRow*> ok;
  for (const auto& r : sweep.rows) {
    if (r.ok) ok.push_back(&r);
  }
  auto obj_tol = [&](const SweepRow& a, const SweepRow& b) {
    return tol * std::max({1.0, std::abs(a.objective), std::abs(b.objective)});
  };
  auto at = [&](const SweepRow& r) { return sweep.parameter + "=" + format_value(r.parameter); };
  for (std::size_t i = 1; i < ok.size(); ++i) {
    const auto& a = *ok[i - 1];
    const auto& b = *ok[i];
    const double dp = b.parameter - a.parameter;
    if (dp <= 0.0) continue;
    const double e = obj_tol(a, b);
    if (sweep.parameter == "gamma" || sweep.parameter == "gamma_u") {
      if (b.objective < a.objective - e) out.push_back("objective decreases at " + at(b));
    }
    if (sweep.parameter == "gamma") {
      if (b.in_vehicle_total > a.in_vehicle_total + 2 * e / dp) out.push_back("in-vehicle time increases at " + at(b));
      // Wait plus the unmet penalty, i.e. everything not weighted by gamma.
      const double wa = a.objective - a.parameter * a.in_vehicle_total;
      const double wb = b.objective - b.parameter * b.in_vehicle_total;
      if (wb < wa - e * (1 + 2 * a.parameter / dp)) out.push_back("wait time decreases at " + at(b));
      if (i >= 2) {
        const auto& z = *ok[i - 2];
        const double d0 = a.parameter - z.parameter;
        if (d0 > 0.0) {
          const double s0 = (a.objective - z.objective) / d0;
          const double s1 = (b.objective - a.objective) / dp;
          if (s1 > s0 + 2 * e / std::min(d0, dp)) out.push_back("objective is not concave at " + at(a));
        }
      }
    }
    if (sweep.parameter == "omega") {
      if (b.crowded_minutes > a.crowded_minutes + std::max(1e-9, 2 * e / dp)) out.push_back("crowded time increases at " + at(b));
    }
  }
  return out;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

using nlohmann::ordered_json;

ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json report_json(const EvaluationReport& r) {
  ordered_json j;
  j["scenario_id"] = r.scenario_id;
  j["avg_wait_minutes"] = num(r.avg_wait_minutes);
  j["avg_in_vehicle_minutes"] = num(r.avg_in_vehicle_minutes);
  j["unsatisfied_fraction"] = num(r.unsatisfied_fraction);
  ordered_json c = ordered_json::object();
  for (const auto& [p, f] : r.crowded_time_fraction) c[p] = num(f);
  j["crowded_time_fraction"] = std::move(c);
  j["total_objective"] = num(r.total_objective);
  j["served"] = num(r.served);
  j["unmet"] = num(r.unmet);
  j["demand"] = num(r.demand);
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string evaluation_json(const std::vector<EvaluationReport>& reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

std::string evaluation_csv(const std::vector<EvaluationReport>& reports) {
  std::set<std::string> patterns;
  for (const auto& r : reports) {
    for (const auto& [p, f] : r.crowded_time_fraction) patterns.insert(p);
  }
  std::ostringstream os;
  os << "scenario_id,avg_wait_minutes,avg_in_vehicle_minutes,unsatisfied_fraction,total_objective,served,unmet,demand";
  for (const auto& p : patterns) os << "," << csv_field("crowded_" + p);
  os << "\n";
  for (const auto& r : reports) {
    os << csv_field(r.scenario_id) << "," << format_value(r.avg_wait_minutes) << ","
       << format_value(r.avg_in_vehicle_minutes) << "," << format_value(r.unsatisfied_fraction) << ","
       << format_value(r.total_objective) << "," << format_value(r.served) << "," << format_value(r.unmet) << ","
       << format_value(r.demand);
    for (const auto& p : patterns) {
      auto it = r.crowded_time_fraction.find(p);
      os << "," << format_value(it == r.crowded_time_fraction.end() ? 0.0 : it->second);
    }
    os << "\n";
  }
  return os.str();
}

std::string comparison_json(const ComparisonReport& rep) {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"scenario_id", r.scenario_id},
                    {"wait_a", num(r.wait_a)},
                    {"wait_b", num(r.wait_b)},
                    {"wait_decrease_pct", num(r.wait_decrease_pct)},
                    {"travel_a", num(r.travel_a)},
                    {"travel_b", num(r.travel_b)},
                    {"travel_decrease_pct", num(r.travel_decrease_pct)}});
  }
  j["rows"] = std::move(rows);
  j["mean"] = {{"wait_a", num(rep.mean_wait_a)},
               {"wait_b", num(rep.mean_wait_b)},
               {"wait_decrease_pct", num(rep.mean_wait_decrease_pct)},
               {"travel_a", num(rep.mean_travel_a)},
               {"travel_b", num(rep.mean_travel_b)},
               {"travel_decrease_pct", num(rep.mean_travel_decrease_pct)}};
  j["wins"] = {{"wait", rep.wait_wins}, {"travel", rep.travel_wins}, {"both", rep.both_wins}, {"scenarios", rep.rows.size()}};
  return j.dump(2) + "\n";
}

std::string comparison_csv(const ComparisonReport& rep) {
  std::ostringstream os;
  os << "scenario_id,wait_a,wait_b,wait_decrease_pct,travel_a,travel_b,travel_decrease_pct\n";
  auto line = [&](const std::string& id, double wa, double wb, double wd, double ta, double tb, double td) {
    os << csv_field(id) << "," << format_value(wa) << "," << format_value(wb) << "," << format_value(wd) << ","
       << format_value(ta) << "," << format_value(tb) << "," << format_value(td) << "\n";
  };
  for (const auto& r : rep.rows) line(r.scenario_id, r.wait_a, r.wait_b, r.wait_decrease_pct, r.travel_a, r.travel_b, r.travel_decrease_pct);
  line("mean", rep.mean_wait_a, rep.mean_wait_b, rep.mean_wait_decrease_pct, rep.mean_travel_a, rep.mean_travel_b,
       rep.mean_travel_decrease_pct);
  return os.str();
}

std::string sweep_json(const Sweep& sweep) {
  ordered_json j;
  j["parameter"] = sweep.parameter;
  ordered_json rows = ordered_json::array();
  for (const auto& r : sweep.rows) {
    ordered_json o;
    o[sweep.parameter] = r.parameter;
    o["ok"] = r.ok;
    if (!r.ok) {
      o["error"] = r.error;
      rows.push_back(std::move(o));
      continue;
    }
    o["status"] = r.status;
    o["objective"] = num(r.objective);
    o["gap"] = num(r.gap);
    o["wait_total"] = num(r.wait_total);
    o["in_vehicle_total"] = num(r.in_vehicle_total);
    o["unmet_total"] = num(r.unmet_total);
    o["avg_wait_minutes"] = num(r.avg_wait_minutes);
    o["avg_in_vehicle_minutes"] = num(r.avg_in_vehicle_minutes);
    o["unsatisfied_fraction"] = num(r.unsatisfied_fraction);
    o["pattern_vehicles"] = r.pattern_vehicles;
    ordered_json c = ordered_json::object();
    for (const auto& [p, f] : r.crowded_time_fraction) c[p] = num(f);
    o["crowded_time_fraction"] = std::move(c);
    o["crowded_minutes"] = num(r.crowded_minutes);
    o["schedule"] = ordered_json::parse(schedule_to_json(r.schedule));
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  j["violations"] = sweep.violations;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const Sweep& sweep) {
  std::set<std::string> patterns;
  for (const auto& r : sweep.rows) {
    for (const auto& [p, n] : r.pattern_vehicles) patterns.insert(p);
  }
  std::ostringstream os;
  os << sweep.parameter
     << ",ok,status,objective,gap,wait_total,in_vehicle_total,unmet_total,avg_wait_minutes,avg_in_vehicle_minutes,"
        "unsatisfied_fraction";
  for (const auto& p : patterns) os << "," << csv_field("vehicles_" + p);
  for (const auto& p : patterns) os << "," << csv_field("crowded_" + p);
  os << ",error\n";
  for (const auto& r : sweep.rows) {
    os << format_value(r.parameter) << "," << (r.ok ? "true" : "false") << "," << r.status << ","
       << format_value(r.objective) << "," << format_value(r.gap) << "," << format_value(r.wait_total) << ","
       << format_value(r.in_vehicle_total) << "," << format_value(r.unmet_total) << ","
       << format_value(r.avg_wait_minutes) << "," << format_value(r.avg_in_vehicle_minutes) << ","
       << format_value(r.unsatisfied_fraction);
    for (const auto& p : patterns) {
      auto it = r.pattern_vehicles.find(p);
      os << "," << (it == r.pattern_vehicles.end() ? 0 : it->second);
    }
    for (const auto& p : patterns) {
      auto it = r.crowded_time_fraction.find(p);
      os << "," << format_value(it == r.crowded_time_fraction.end() ? 0.0 : it->second);
    }
    os << "," << csv_field(r.error) << "\n";
  }
  return os.str();
}

std::string sweep_svg(const Sweep& sweep) {
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 30, B = 50;
  std::vector<const SweepRow*> ok;
  for (const auto& r : sweep.rows) {
    if (r.ok) ok.push_back(&r);
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!ok.empty()) {
    x0 = x1 = ok.front()->parameter;
    y1 = 0;
    for (const auto* r : ok) {
      x0 = std::min(x0, r->parameter);
      x1 = std::max(x1, r->parameter);
      y1 = std::max({y1, r->avg_wait_minutes, r->avg_in_vehicle_minutes});
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 <= 0) y1 = 1;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto f2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << f2(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << f2(xv) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << f2(py(yv) + 4) << "\" text-anchor=\"end\">" << f2(yv) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << sweep.parameter
     << "</text>\n";
  os << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << (T + H - B) / 2 << ")\">minutes per served passenger</text>\n";
  auto series = [&](const char* color, auto get) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < ok.size(); ++i) os << (i ? " " : "") << f2(px(ok[i]->parameter)) << "," << f2(py(get(*ok[i])));
    os << "\"/>\n";
  };
  series("#1f77b4", [](const SweepRow& r) { return r.avg_wait_minutes; });
  series("#ff7f0e", [](const SweepRow& r) { return r.avg_in_vehicle_minutes; });
  os << "<text x=\"" << W - R - 150 << "\" y=\"" << T << "\" fill=\"#1f77b4\">avg wait</text>\n";
  os << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 16 << "\" fill=\"#ff7f0e\">avg in-vehicle</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string budget_table_header() {
  return "gamma,wait_time,wait_compare,wait_improve,travel_time,travel_compare,travel_improve,gap";
}

std::string budget_table_line(const BudgetTableRow& row) {
  auto fixed = [](double v, int digits) {
    if (std::isnan(v)) return std::string("nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s(buf);
    if (s == "-0.0" || s == "-0.00" || s == "-0.000") s.erase(0, 1);
    return s;
  };
  auto pct = [&](double v) { return std::isnan(v) ? std::string("nan") : fixed(v, 2) + "%"; };
  const std::string gap = std::isnan(row.gap) ? "n/a" : row.gap <= 1e-9 ? "OPT" : fixed(100.0 * row.gap, 2) + "%";
  return fixed(row.gamma_u, 1) + "," + fixed(row.versus_compare.mean_wait_a, 3) + "," +
         pct(row.versus_compare.mean_wait_decrease_pct) + "," + pct(row.versus_baseline.mean_wait_decrease_pct) + "," +
         fixed(row.versus_compare.mean_travel_a, 3) + "," + pct(row.versus_compare.mean_travel_decrease_pct) + "," +
         pct(row.versus_baseline.mean_travel_decrease_pct) + "," + gap;
}

std::string budget_table_csv(const std::vector<BudgetTableRow>& rows) {
  std::string out = budget_table_header() + "\n";
  for (const auto& r : rows) out += budget_table_line(r) + "\n";
  return out;
}

}  // namespace tfsp
