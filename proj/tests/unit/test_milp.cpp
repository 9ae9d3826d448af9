#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "support/random_milp.hpp"
#include "tfsp/error.hpp"
#include "tfsp/milp/check.hpp"
#include "tfsp/milp/lp_writer.hpp"
#include "tfsp/milp/solver.hpp"

using namespace tfsp;
using namespace tfsp::milp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Checks primal feasibility, dual sign conditions and zero duality gap from
// the solver's duals and reduced costs.
void expect_lp_certificate(const MilpModel& m, const LpResult& r) {
  constexpr double tol = 1e-6;
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_TRUE(check_solution(m, r.values, tol).violations.empty() ||
              [&] {  // binaries may be fractional in a relaxation
                for (const auto& v : check_solution(m, r.values, tol).violations) {
                  if (v.kind != ViolationKind::kIntegrality) return false;
                }
                return true;
              }());
  double dual_obj = 0.0;
  for (int i = 0; i < m.num_constraints(); ++i) {
    const auto& row = m.constraint(i);
    const double y = r.row_duals[i];
    if (row.sense == Sense::kLessEqual) {
      EXPECT_LE(y, tol) << row.name;
    }
    if (row.sense == Sense::kGreaterEqual) {
      EXPECT_GE(y, -tol) << row.name;
    }
    dual_obj += y * row.rhs;
  }
  for (int j = 0; j < m.num_variables(); ++j) {
    double d = m.objective()[j];
    for (int i = 0; i < m.num_constraints(); ++i) {
      for (const auto& t : m.constraint(i).terms) {
        if (t.var == j) d -= t.coef * r.row_duals[i];
      }
    }
    EXPECT_NEAR(d, r.reduced_costs[j], 1e-6);
    const auto& v = m.variable(j);
    if (d > tol) {
      ASSERT_TRUE(std::isfinite(v.lower));
      EXPECT_NEAR(r.values[j], v.lower, 1e-6);
      dual_obj += d * v.lower;
    } else if (d < -tol) {
      ASSERT_TRUE(std::isfinite(v.upper));
      EXPECT_NEAR(r.values[j], v.upper, 1e-6);
      dual_obj += d * v.upper;
    }
  }
  EXPECT_NEAR(dual_obj, r.objective, 1e-6 * std::max(1.0, std::abs(r.objective)));
}

}  // namespace

TEST(Model, RejectsDuplicateNames) {
  MilpModel m;
  m.add_continuous("x", 0, 1);
  EXPECT_THROW(m.add_continuous("x", 0, 1), InvalidInput);
  m.add_constraint("c", {{0, 1.0}}, Sense::kLessEqual, 1);
  EXPECT_THROW(m.add_constraint("c", {{0, 1.0}}, Sense::kLessEqual, 1), InvalidInput);
  EXPECT_THROW(m.add_constraint("d", {{3, 1.0}}, Sense::kLessEqual, 1), InvalidInput);
}

TEST(Simplex, TwoVariableCover) {
  MilpModel m;
  const int x = m.add_continuous("x", 0, 5, 1);
  const int y = m.add_continuous("y", 0, 5, 1);
  m.add_constraint("cover", {{x, 1}, {y, 1}}, Sense::kGreaterEqual, 2);
  auto r = solve_lp(m);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 2.0, 1e-9);
  expect_lp_certificate(m, r);
  auto s = solve(m);
  EXPECT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, 2.0, 1e-9);
}

TEST(Simplex, Infeasible) {
  MilpModel m;
  const int x = m.add_continuous("x", -kInfinity, kInfinity);
  m.add_constraint("lo", {{x, 1}}, Sense::kGreaterEqual, 1);
  m.add_constraint("hi", {{x, 1}}, Sense::kLessEqual, 0);
  EXPECT_EQ(solve_lp(m).status, LpStatus::kInfeasible);
  EXPECT_EQ(solve(m).status, SolveStatus::kInfeasible);
}

TEST(Simplex, Unbounded) {
  MilpModel m;
  const int x = m.add_continuous("x", 0, kInfinity, -1);
  const int y = m.add_continuous("y", 0, kInfinity, 0);
  m.add_constraint("r", {{x, 1}, {y, -1}}, Sense::kLessEqual, 3);
  EXPECT_EQ(solve_lp(m).status, LpStatus::kUnbounded);
  EXPECT_EQ(solve(m).status, SolveStatus::kUnbounded);
}

TEST(Simplex, FreeVariablesAndEqualities) {
  MilpModel m;
  const int x = m.add_continuous("x", -kInfinity, kInfinity, 1);
  const int y = m.add_continuous("y", -kInfinity, kInfinity, 2);
  m.add_constraint("e", {{x, 1}, {y, 1}}, Sense::kEqual, -4);
  m.add_constraint("c", {{x, 1}, {y, -1}}, Sense::kLessEqual, 2);
  // x = y + 2 at the optimum: x = -1, y = -3, objective -7.
  auto r = solve_lp(m);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.values[x], -1, 1e-9);
  EXPECT_NEAR(r.values[y], -3, 1e-9);
  EXPECT_NEAR(r.objective, -7, 1e-9);
  expect_lp_certificate(m, r);
}

TEST(Simplex, DegenerateVertexTerminates) {
  // Many constraints through the same vertex provoke degenerate pivots.
  MilpModel m;
  const int x = m.add_continuous("x", 0, kInfinity, -1);
  const int y = m.add_continuous("y", 0, kInfinity, -1);
  for (int k = 1; k <= 30; ++k) {
    m.add_constraint("r" + std::to_string(k), {{x, static_cast<double>(k)}, {y, 1.0}}, Sense::kLessEqual, k + 1.0);
  }
  auto r = solve_lp(m);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  expect_lp_certificate(m, r);
}

TEST(Simplex, RandomDualityCertificates) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto m = oracle::random_milp(seed, {6, 20, 12});
    auto r = solve_lp(m);
    if (r.status != LpStatus::kOptimal) continue;
    SCOPED_TRACE(seed);
    expect_lp_certificate(m, r);
  }
}

TEST(Solver, MatchesEnumeration) {
  int feasible = 0;
  for (std::uint64_t seed = 1000; seed < 1060; ++seed) {
    auto m = oracle::random_milp(seed, {9, 12, 8});
    auto s = solve(m);
    auto oracle = oracle::enumerate_optimum(m);
    SCOPED_TRACE(seed);
    if (!oracle) {
      EXPECT_EQ(s.status, SolveStatus::kInfeasible);
      continue;
    }
    ++feasible;
    ASSERT_EQ(s.status, SolveStatus::kOptimal);
    EXPECT_NEAR(s.objective, *oracle, 1e-6);
    EXPECT_TRUE(check_solution(m, s.values, 1e-6).empty()) << check_solution(m, s.values).summary();
  }
  EXPECT_GT(feasible, 30);
}

TEST(Solver, DeterministicAndTraceRespectsBounds) {
  auto m = oracle::random_milp(77, {10, 10, 8});
  SolveLimits limits;
  limits.record_trace = true;
  auto a = solve(m, limits);
  auto b = solve(m, limits);
  ASSERT_EQ(a.status, SolveStatus::kOptimal);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_LE(a.root_bound, a.objective + 1e-9);
  double last = -kInfinity;
  for (const auto& rec : a.trace) {
    EXPECT_LE(rec.global_bound, a.objective + 1e-6);
    EXPECT_LE(rec.global_bound, rec.incumbent + 1e-6);
    EXPECT_GE(rec.global_bound, last - 1e-9);  // best-first
    last = rec.global_bound;
  }
}

TEST(Solver, NodeLimitReportsTrueGap) {
  // Knapsack with awkward weights to force branching.
  MilpModel m;
  std::vector<Term> w;
  for (int j = 0; j < 12; ++j) {
    const int v = m.add_binary("b" + std::to_string(j), -(10.0 + 3 * j));
    w.push_back({v, 7.0 + 2 * j + (j % 3)});
  }
  m.add_constraint("cap", w, Sense::kLessEqual, 61);
  SolveLimits limits;
  limits.node_limit = 3;
  auto s = solve(m, limits);
  auto full = solve(m);
  ASSERT_EQ(full.status, SolveStatus::kOptimal);
  if (s.status == SolveStatus::kLimit && !s.values.empty()) {
    EXPECT_GE(s.objective, full.objective - 1e-9);
    EXPECT_LE(s.best_bound, full.objective + 1e-9);
    EXPECT_NEAR(s.gap, s.objective - s.best_bound, 1e-9);
  } else {
    EXPECT_NEAR(s.objective, full.objective, 1e-6);
  }
}

TEST(Check, ReportsExactlyTheViolatedRow) {
  MilpModel m;
  const int x = m.add_continuous("x", 0, 10);
  const int y = m.add_binary("y");
  m.add_constraint("a", {{x, 1}}, Sense::kLessEqual, 3);
  m.add_constraint("b", {{x, 1}, {y, 1}}, Sense::kGreaterEqual, 1);
  EXPECT_TRUE(check_solution(m, std::vector<double>{2.0, 1.0}).empty());
  auto rep = check_solution(m, std::vector<double>{3.5, 1.0}, 1e-6);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].name, "a");
  EXPECT_NEAR(rep.violations[0].amount, 0.5, 1e-12);
  auto frac = check_solution(m, std::vector<double>{2.0, 0.5});
  ASSERT_EQ(frac.violations.size(), 1u);
  EXPECT_EQ(frac.violations[0].kind, ViolationKind::kIntegrality);
  EXPECT_THROW(check_solution(m, std::map<std::string, double>{{"x", 1.0}}), InvalidInput);
}

TEST(LpWriter, OneVariableGolden) {
  MilpModel m;
  const int x = m.add_binary("x", 1);
  m.add_constraint("c1", {{x, 1}}, Sense::kGreaterEqual, 1);
  auto out = export_model(m);
  EXPECT_EQ(out.text, read_file(std::string(TFSP_TEST_DATA) + "/golden/one_var.lp"));
  EXPECT_TRUE(out.renamed.empty());
  EXPECT_EQ(export_model(m).text, out.text);
}

TEST(LpWriter, SanitizesNames) {
  MilpModel m;
  m.add_continuous("1st", 0, 1, 1);
  m.add_continuous("e2", 0, 1);
  m.add_continuous("a b", -kInfinity, kInfinity);
  m.add_continuous("a_b", -2, kInfinity);
  m.add_continuous("x(p,v,3)", 0, 4);
  auto out = export_model(m);
  EXPECT_EQ(out.renamed.at("1st"), "_1st");
  EXPECT_EQ(out.renamed.at("e2"), "_e2");
  EXPECT_EQ(out.renamed.at("a b"), "a_b_1");
  EXPECT_EQ(out.renamed.count("a_b"), 0u);
  EXPECT_EQ(out.renamed.count("x(p,v,3)"), 0u);
  EXPECT_NE(out.text.find(" a_b_1 free"), std::string::npos);
  EXPECT_NE(out.text.find(" a_b >= -2"), std::string::npos);
  EXPECT_NE(out.text.find(" 0 <= x(p,v,3) <= 4"), std::string::npos);
}

TEST(LpWriter, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e5, 123456.789, 2.5e-9}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(100000.0), "100000");
}

TEST(LpWriter, WrapsLongRows) {
  MilpModel m;
  std::vector<Term> terms;
  for (int j = 0; j < 40; ++j) terms.push_back({m.add_continuous("long_variable_name_" + std::to_string(j), 0, 1, 1), 1.5});
  m.add_constraint("big", terms, Sense::kLessEqual, 10);
  auto text = export_model(m).text;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) EXPECT_LE(line.size(), 80u) << line;
}

TEST(SolutionCsv, RoundTripThroughRenames) {
  MilpModel m;
  m.add_continuous("1st", 0, 1);
  m.add_continuous("x(p,v,3)", 0, 4);
  auto out = export_model(m);
  std::istringstream in("variable,value\n_1st,0.25\nx(p,v,3),3\n");
  auto values = read_solution_csv(in, out.renamed);
  EXPECT_DOUBLE_EQ(values.at("1st"), 0.25);
  EXPECT_DOUBLE_EQ(values.at("x(p,v,3)"), 3.0);
  std::istringstream bad("variable,value\nx,abc\n");
  EXPECT_THROW(read_solution_csv(bad), ParseError);
}
