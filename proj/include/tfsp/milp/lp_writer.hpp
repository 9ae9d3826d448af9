#pragma once

#include <istream>
#include <map>
#include <string>

#include "tfsp/milp/model.hpp"

namespace tfsp::milp {

struct LpExport {
  std::string text;
  // Original name -> written name, only for names that had to change.
  std::map<std::string, std::string> renamed;
};

// Renders the model in CPLEX LP format: Minimize / Subject To / Bounds /
// Binaries / End. Output depends only on the model, never on addresses or
// hash order. Illegal name characters become '_', names that would start
// with a digit, '.', or an exponent letter get a '_' prefix, and collisions
// are resolved with a numeric suffix.
LpExport export_model(const MilpModel& model);

// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

// Reads "variable,value" rows (header required). Names may be either the
// original model names or the exported ones; `renamed` maps them back.
std::map<std::string, double> read_solution_csv(std::istream& in, const std::map<std::string, std::string>& renamed = {});

}  // namespace tfsp::milp
