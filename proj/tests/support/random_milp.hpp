#pragma once

// Random mixed-binary models and a brute-force oracle that enumerates every
// binary assignment and solves the remaining LP.

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "tfsp/milp/model.hpp"
#include "tfsp/milp/simplex.hpp"

namespace tfsp::oracle {

struct RandomMilpShape {
  int max_binaries = 8;
  int max_continuous = 10;
  int max_rows = 8;
};

inline milp::MilpModel random_milp(std::uint64_t seed, const RandomMilpShape& shape) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  milp::MilpModel m;
  const int nb = uniform_int(1, shape.max_binaries);
  const int nc = uniform_int(0, shape.max_continuous);
  std::vector<double> point;
  for (int j = 0; j < nb; ++j) {
    m.add_binary("b" + std::to_string(j), uniform_int(-10, 10));
    point.push_back(uniform_int(0, 1));
  }
  for (int j = 0; j < nc; ++j) {
    const double ub = uniform_int(1, 10);
    m.add_continuous("c" + std::to_string(j), 0.0, ub, uniform_int(-10, 10));
    point.push_back(std::uniform_real_distribution<double>(0.0, ub)(rng));
  }
  const int rows = uniform_int(1, shape.max_rows);
  const bool anchored = uniform_int(0, 9) != 0;  // most instances feasible by construction
  for (int i = 0; i < rows; ++i) {
    std::vector<milp::Term> terms;
    double activity = 0.0;
    for (int j = 0; j < m.num_variables(); ++j) {
      if (uniform_int(0, 1) == 0) continue;
      const int a = uniform_int(-5, 5);
      if (a == 0) continue;
      terms.push_back({j, static_cast<double>(a)});
      activity += a * point[j];
    }
    const int kind = uniform_int(0, 4);
    const auto sense = kind < 2 ? milp::Sense::kLessEqual : kind < 4 ? milp::Sense::kGreaterEqual : milp::Sense::kEqual;
    double rhs = anchored ? activity : uniform_int(-10, 10);
    if (anchored && sense == milp::Sense::kLessEqual) rhs += uniform_int(0, 3);
    if (anchored && sense == milp::Sense::kGreaterEqual) rhs -= uniform_int(0, 3);
    m.add_constraint("r" + std::to_string(i), std::move(terms), sense, rhs);
  }
  return m;
}

// Minimum objective over all binary assignments, or nullopt if infeasible.
inline std::optional<double> enumerate_optimum(const milp::MilpModel& model) {
  std::vector<int> binaries;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).kind == milp::VarKind::kBinary) binaries.push_back(j);
  }
  milp::LpSolver lp(model);
  std::vector<double> lo(model.num_variables()), up(model.num_variables());
  std::optional<double> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << binaries.size()); ++mask) {
    for (int j = 0; j < model.num_variables(); ++j) {
      lo[j] = model.variable(j).lower;
      up[j] = model.variable(j).upper;
    }
    for (std::size_t k = 0; k < binaries.size(); ++k) lo[binaries[k]] = up[binaries[k]] = (mask >> k) & 1;
    auto r = lp.solve(lo, up);
    if (r.status == milp::LpStatus::kOptimal && (!best || r.objective < *best)) best = r.objective;
  }
  return best;
}

}  // namespace tfsp::oracle
