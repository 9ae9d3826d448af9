#include "tfsp/robust.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include <json.hpp>

#include "tfsp/error.hpp"
#include "tfsp/milp/check.hpp"

namespace tfsp {

namespace {

constexpr std::size_t kOracleMaxSupport = 20;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// floor(gamma) with a little slack so 2.0000000001 counts as 2.
double full_entries(double gamma) { return std::floor(gamma + 1e-12); }

std::string flow_args(const PassengerFlow& f) {
  return f.origin + "," + f.destination + "," + std::to_string(f.period);
}

// Greedy maximizer of q^T z over the unit-box budget set.
std::vector<double> greedy_maximizer(const std::vector<double>& q, double gamma) {
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(q[a]) > std::abs(q[b]); });
  std::vector<double> z(q.size(), 0.0);
  double left = gamma;
  for (std::size_t i : order) {
    if (left <= 0.0) break;
    const double mag = std::min(1.0, left);
    z[i] = q[i] >= 0 ? mag : -mag;
    left -= mag;
  }
  return z;
}

}  // namespace

BudgetUncertaintySet::BudgetUncertaintySet(FlowStats stats, double gamma, std::optional<std::vector<PassengerFlow>> support)
    : stats_(std::move(stats)), gamma_(gamma) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw InvalidInput("uncertainty budget gamma_u must be finite and >= 0");
  flows_ = support ? *support : stats_.support();
  std::sort(flows_.begin(), flows_.end());
  flows_.erase(std::unique(flows_.begin(), flows_.end()), flows_.end());
  for (const auto& f : flows_) {
    const double mu = stats_.mean_of(f);
    if (!(mu > 0.0)) throw InvalidInput("support flow " + to_string(f) + " has no positive mean");
    const double sd = stats_.std_of(f);
    if (!(sd >= 0.0)) throw InvalidInput("negative standard deviation for " + to_string(f));
    mu_.push_back(mu);
    sigma_.push_back(std::min(sd, mu));
  }
}

std::map<PassengerFlow, double> BudgetUncertaintySet::mean_demand() const {
  std::map<PassengerFlow, double> out;
  for (std::size_t i = 0; i < flows_.size(); ++i) out.emplace(flows_[i], mu_[i]);
  return out;
}

bool BudgetUncertaintySet::contains(const std::vector<double>& zeta, double tol) const {
  if (zeta.size() != flows_.size()) return false;
  double l1 = 0.0;
  for (double z : zeta) {
    if (std::abs(z) > 1.0 + tol) return false;
    l1 += std::abs(z);
  }
  return l1 <= gamma_ + tol;
}

std::map<PassengerFlow, double> BudgetUncertaintySet::realize(const std::vector<double>& zeta) const {
  if (zeta.size() != flows_.size()) throw InvalidInput("zeta has the wrong dimension");
  std::map<PassengerFlow, double> out;
  for (std::size_t i = 0; i < flows_.size(); ++i) out.emplace(flows_[i], mu_[i] + sigma_[i] * zeta[i]);
  return out;
}

double budget_support(const std::vector<double>& q, double rho, double gamma) {
  if (rho < 0.0 || gamma < 0.0) throw InvalidInput("budget set radii must be nonnegative");
  if (rho == 0.0) return 0.0;
  std::vector<double> mags;
  for (double v : q) mags.push_back(std::abs(v));
  std::sort(mags.rbegin(), mags.rend());
  double left = gamma, total = 0.0;
  for (double m : mags) {
    if (left <= 0.0) break;
    const double step = std::min(rho, left);
    total += m * step;
    left -= step;
  }
  return total;
}

std::size_t budget_extreme_point_count(std::size_t n, double gamma) {
  if (gamma <= 0.0 || n == 0) return 1;
  const double kf = full_entries(gamma);
  if (kf >= static_cast<double>(n)) return std::size_t{1} << std::min<std::size_t>(n, 63);
  const std::size_t k = static_cast<std::size_t>(kf);
  const bool frac = gamma - kf > 1e-12;
  // C(n, k) * 2^k * (2 (n - k) if fractional)
  double count = 1.0;
  for (std::size_t i = 0; i < k; ++i) count = count * static_cast<double>(n - i) / static_cast<double>(i + 1);
  count *= std::ldexp(1.0, static_cast<int>(k));
  if (frac) count *= 2.0 * static_cast<double>(n - k);
  return count > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(std::llround(count));
}

std::vector<std::vector<double>> budget_extreme_points(std::size_t n, double gamma, std::size_t cap) {
  if (gamma < 0.0) throw InvalidInput("gamma must be nonnegative");
  const std::size_t count = budget_extreme_point_count(n, gamma);
  if (count > cap) {
    throw InvalidInput("budget set has " + std::to_string(count) + " extreme points, more than the cap " + std::to_string(cap));
  }
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::vector<double> z(n, 0.0);
  if (gamma <= 0.0 || n == 0) {
    out.push_back(z);
    return out;
  }
  const double kf = full_entries(gamma);
  const std::size_t k = kf >= static_cast<double>(n) ? n : static_cast<std::size_t>(kf);
  const double frac = k < n ? gamma - kf : 0.0;
  const bool want_frac = frac > 1e-12;
  std::function<void(std::size_t, std::size_t, bool)> rec = [&](std::size_t i, std::size_t fulls, bool partial) {
    const std::size_t need = (k - fulls) + (want_frac && !partial ? 1 : 0);
    if (n - i < need) return;
    if (i == n) {
      out.push_back(z);
      return;
    }
    if (n - i > need) {
      z[i] = 0.0;
      rec(i + 1, fulls, partial);
    }
    if (fulls < k) {
      for (double s : {1.0, -1.0}) {
        z[i] = s;
        rec(i + 1, fulls + 1, partial);
      }
    }
    if (want_frac && !partial) {
      for (double s : {1.0, -1.0}) {
        z[i] = s * frac;
        rec(i + 1, fulls, true);
      }
    }
    z[i] = 0.0;
  };
  rec(0, 0, false);
  return out;
}

std::size_t robust_aux_count(std::size_t flows) { return flows * flows + 2 * flows + 1; }
std::size_t robust_added_rows(std::size_t flows) { return flows * flows + 2 * flows; }

RobustCounterpartModel build_robust_counterpart(const TransitInstance& instance, const BudgetUncertaintySet& uset,
                                                const ModelParams& params, const RobustOptions& options) {
  if (uset.size() == 0) throw InvalidInput("robust model needs at least one flow with positive mean demand");
  instance.validate();
  validate_params(instance, params);
  for (const auto& f : uset.flows()) validate_flow(f, instance);

  RobustCounterpartModel rc{uset, {}, {}, false, robust_aux_count(uset.size()), robust_added_rows(uset.size()), {}};
  if (uset.size() > options.materialize_cap) return rc;

  const std::size_t n = uset.size();
  const auto& flows = uset.flows();
  const double M = params.big_m;
  const double G = uset.gamma();
  auto& built = rc.built;
  auto& m = built.model;
  auto& idx = built.index;
  built.kind = ModelKind::kRobust;
  built.params = params;
  add_schedule_block(instance, params, built);
  const auto mu = uset.mean_demand();
  begin_scenario(built, "mean", flows, mu);
  const auto per_flow = add_lambda_block(instance, params, flows, mu, 0.0, 0, built);
  add_capacity_rows(instance, params, 0, false, 0.0, built);

  auto& aux = rc.aux;
  aux.alpha = m.add_continuous("alpha", -milp::kInfinity, milp::kInfinity, 1.0);
  for (const auto& f : flows) aux.nu1.push_back(m.add_continuous("nu1(" + flow_args(f) + ")", 0.0, milp::kInfinity));
  aux.nu2 = m.add_continuous("nu2", 0.0, milp::kInfinity);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      aux.nu3.emplace(std::make_pair(static_cast<int>(a), static_cast<int>(b)),
                      m.add_continuous("nu3(" + flow_args(flows[a]) + ";" + flow_args(flows[b]) + ")", 0.0,
                                       milp::kInfinity));
    }
  }
  for (const auto& f : flows) aux.nu4.push_back(m.add_continuous("nu4(" + flow_args(f) + ")", 0.0, milp::kInfinity));

  rc.served.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = per_flow.find(flows[i]);
    if (it != per_flow.end()) rc.served[i] = it->second;
  }

  // Epigraph: sum (c - M) lam + sum nu1 + G nu2 - alpha <= -M sum mu.
  {
    std::vector<milp::Term> terms;
    double mu_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mu_total += uset.mu(i);
      for (int k : rc.served[i]) {
        const auto& l = idx.lambdas[k];
        terms.push_back({l.var, l.wait_minutes + params.gamma * l.in_vehicle_minutes - M});
      }
    }
    for (int v : aux.nu1) terms.push_back({v, 1.0});
    if (G != 0.0) terms.push_back({aux.nu2, G});
    terms.push_back({aux.alpha, -1.0});
    m.add_constraint("epigraph", std::move(terms), milp::Sense::kLessEqual, -M * mu_total);
    ++idx.row_counts["epigraph"];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = M * uset.sigma(i);
    const std::string args = flow_args(flows[i]);
    m.add_constraint("dev_pos(" + args + ")", {{aux.nu1[i], 1.0}, {aux.nu2, 1.0}}, milp::Sense::kGreaterEqual, dev);
    m.add_constraint("dev_neg(" + args + ")", {{aux.nu1[i], 1.0}, {aux.nu2, 1.0}}, milp::Sense::kGreaterEqual, -dev);
    idx.row_counts["deviation"] += 2;
  }
  // Availability: served_f + sum_f' nu3(f,f') + G nu4_f <= mu_f.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<milp::Term> terms;
    for (int k : rc.served[i]) terms.push_back({idx.lambdas[k].var, 1.0});
    for (std::size_t j = 0; j < n; ++j) terms.push_back({aux.nu3.at({static_cast<int>(i), static_cast<int>(j)}), 1.0});
    if (G != 0.0) terms.push_back({aux.nu4[i], G});
    m.add_constraint("avail(" + flow_args(flows[i]) + ")", std::move(terms), milp::Sense::kLessEqual, uset.mu(i));
    ++idx.row_counts["availability"];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m.add_constraint("avail_dual(" + flow_args(flows[i]) + ";" + flow_args(flows[j]) + ")",
                       {{aux.nu3.at({static_cast<int>(i), static_cast<int>(j)}), 1.0}, {aux.nu4[i], 1.0}},
                       milp::Sense::kGreaterEqual, i == j ? uset.sigma(i) : 0.0);
      ++idx.row_counts["availability_dual"];
    }
  }
  rc.materialized = true;
  return rc;
}

milp::MilpSolution solve_robust(const RobustCounterpartModel& rc, const milp::SolveLimits& limits,
                                const RobustOptions& options) {
  if (!rc.materialized || rc.uset.size() > options.solve_cap) {
    throw SolverError("robust model with " + std::to_string(rc.uset.size()) +
                      " flows exceeds the embedded solve cap of " + std::to_string(options.solve_cap) +
                      "; export it with export-lp and solve it externally");
  }
  return milp::solve(rc.built.model, limits);
}

std::string robust_manifest_json(const RobustCounterpartModel& rc, const TransitInstance& instance) {
  using nlohmann::ordered_json;
  ordered_json doc;
  if (rc.materialized) doc = ordered_json::parse(manifest_json(rc.built, instance));
  doc["model"] = "robust";
  doc["gamma_u"] = rc.uset.gamma();
  doc["support_size"] = rc.uset.size();
  doc["materialized"] = rc.materialized;
  const std::size_t n = rc.uset.size();
  doc["auxiliaries"] = {{"total", rc.aux_count}, {"nu1", n}, {"nu2", 1}, {"nu3", n * n}, {"nu4", n}};
  doc["added_rows"] = rc.added_rows;
  doc["epigraph_variable"] = "alpha";
  doc["eliminated"] = {{"variable", "unmet"},
                       {"substitution", "unmet(o,d,t) = mu(o,d,t) + s(o,d,t) * zeta(o,d,t) - sum lam(o,d,t,*)"},
                       {"deviation", "s = min(sigma, mu)"}};
  return doc.dump(2) + "\n";
}

RobustAssignment robust_assignment(const RobustCounterpartModel& rc, const std::vector<double>& values) {
  if (!rc.materialized) throw InvalidInput("robust model was not materialized");
  RobustAssignment a;
  const auto& idx = rc.built.index;
  const double g = rc.built.params.gamma;
  a.served.assign(rc.uset.size(), 0.0);
  for (std::size_t i = 0; i < rc.served.size(); ++i) {
    for (int k : rc.served[i]) {
      const auto& l = idx.lambdas[k];
      const double v = values.at(l.var);
      a.served[i] += v;
      a.cost += (l.wait_minutes + g * l.in_vehicle_minutes) * v;
    }
  }
  a.alpha = values.at(rc.aux.alpha);
  return a;
}

namespace {

double epigraph_lhs(const BudgetUncertaintySet& u, const RobustAssignment& a, const ModelParams& p,
                    const std::vector<double>& z) {
  double v = a.cost;
  for (std::size_t i = 0; i < u.size(); ++i) v += p.big_m * (u.mu(i) + u.sigma(i) * z[i] - a.served[i]);
  return v;
}

void check_sizes(const BudgetUncertaintySet& u, const RobustAssignment& a) {
  if (a.served.size() != u.size()) throw InvalidInput("assignment does not match the uncertainty set support");
}

}  // namespace

WorstCase worst_case_oracle(const BudgetUncertaintySet& uset, const RobustAssignment& assignment,
                            const ModelParams& params) {
  check_sizes(uset, assignment);
  if (uset.size() > kOracleMaxSupport) {
    throw InvalidInput("worst-case oracle supports at most " + std::to_string(kOracleMaxSupport) + " flows");
  }
  WorstCase w;
  w.value = -std::numeric_limits<double>::infinity();
  w.min_slack = std::numeric_limits<double>::infinity();
  for (const auto& z : budget_extreme_points(uset.size(), uset.gamma())) {
    ++w.points;
    const double v = epigraph_lhs(uset, assignment, params, z);
    if (v > w.value) {
      w.value = v;
      w.zeta = z;
    }
    for (std::size_t i = 0; i < uset.size(); ++i) {
      const double s = uset.mu(i) + uset.sigma(i) * z[i] - assignment.served[i];
      if (s < w.min_slack) {
        w.min_slack = s;
        w.zeta_slack = z;
        w.slack_flow = i;
      }
    }
  }
  if (uset.size() == 0) w.min_slack = 0.0;
  return w;
}

std::vector<double> sample_budget_point(std::size_t n, double gamma, std::uint64_t seed, std::uint64_t index) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(index + 0x6a09e667f3bcc909ULL)));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> z(n);
  double l1 = 0.0;
  for (auto& v : z) {
    v = unit(rng);
    l1 += std::abs(v);
  }
  if (l1 > gamma) {
    const double scale = l1 > 0.0 ? gamma / l1 : 0.0;
    for (auto& v : z) v *= scale;
  }
  return z;
}

RobustValidationReport validate_robust_assignment(const BudgetUncertaintySet& uset, const RobustAssignment& assignment,
                                                  const ModelParams& params, std::size_t n_samples,
                                                  std::uint64_t seed, double tol) {
  check_sizes(uset, assignment);
  const std::size_t n = uset.size();
  RobustValidationReport report;
  // Worst violation per row.
  std::map<std::string, RobustViolation> worst;
  const double epi_tol = tol * std::max(1.0, std::abs(assignment.alpha));
  auto check = [&](const std::vector<double>& z) {
    const double excess = epigraph_lhs(uset, assignment, params, z) - assignment.alpha;
    if (excess > epi_tol) {
      auto& v = worst["epigraph"];
      if (excess > v.amount) v = {"epigraph", z, excess};
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double short_by = assignment.served[i] - uset.mu(i) - uset.sigma(i) * z[i];
      if (short_by > tol) {
        const std::string row = "availability(" + to_string(uset.flows()[i]) + ")";
        auto& v = worst[row];
        if (short_by > v.amount) v = {row, z, short_by};
      }
    }
  };
  for (std::size_t s = 0; s < n_samples; ++s) {
    check(sample_budget_point(n, uset.gamma(), seed, s));
    ++report.samples;
  }
  if (n <= kOracleMaxSupport && budget_extreme_point_count(n, uset.gamma()) <= 2'000'000) {
    for (const auto& z : budget_extreme_points(n, uset.gamma())) {
      check(z);
      ++report.extreme_points;
    }
  } else {
    // Exact worst cases: the epigraph row maximizes M s^T zeta, each
    // availability row minimizes s_f zeta_f.
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = params.big_m * uset.sigma(i);
    check(greedy_maximizer(q, uset.gamma()));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> z(n, 0.0);
      z[i] = -std::min(1.0, uset.gamma());
      check(z);
    }
    report.extreme_points = n + 1;
  }
  for (auto& [row, v] : worst) report.violations.push_back(std::move(v));
  return report;
}

RobustValidationReport validate_robust_solution(const RobustCounterpartModel& rc, const std::vector<double>& values,
                                                std::size_t n_samples, std::uint64_t seed, double tol) {
  if (!rc.materialized) throw InvalidInput("robust model was not materialized");
  const auto rep = milp::check_solution(rc.built.model, values);
  if (!rep.empty()) throw InvalidInput("solution violates the robust counterpart: " + rep.summary());
  return validate_robust_assignment(rc.uset, robust_assignment(rc, values), rc.built.params, n_samples, seed, tol);
}

}  // namespace tfsp
