#include "tfsp/milp/lp_writer.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

#include "tfsp/error.hpp"

namespace tfsp::milp {

namespace {

constexpr std::size_t kMaxLine = 80;
constexpr std::size_t kMaxName = 255;

bool legal_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  return std::string_view("!\"#$%&()/,.;?@_`'{}|~").find(c) != std::string_view::npos;
}

std::string sanitize(const std::string& name) {
  std::string out;
  out.reserve(name.size() + 1);
  for (char c : name) out.push_back(legal_char(c) ? c : '_');
  if (out.empty()) out = "_";
  const char first = out.front();
  if (std::isdigit(static_cast<unsigned char>(first)) || first == '.' || first == 'e' || first == 'E') {
    out.insert(out.begin(), '_');
  }
  if (out.size() > kMaxName) out.resize(kMaxName);
  return out;
}

// Assigns written names for one namespace (variables or rows), recording
// every change in `renamed`.
std::vector<std::string> assign_names(const std::vector<std::string>& names, std::map<std::string, std::string>& renamed) {
  std::set<std::string> taken;
  std::vector<std::string> out;
  out.reserve(names.size());
  // Names that are already legal keep priority over rewritten ones.
  for (const auto& n : names) {
    if (sanitize(n) == n) taken.insert(n);
  }
  for (const auto& n : names) {
    std::string s = sanitize(n);
    if (s != n) {
      const std::string base = s;
      for (int k = 1; taken.count(s); ++k) s = base + "_" + std::to_string(k);
      taken.insert(s);
      renamed.emplace(n, s);
    }
    out.push_back(s);
  }
  return out;
}

class LineWriter {
 public:
  explicit LineWriter(std::ostringstream& os) : os_(os) {}

  void start(const std::string& head) {
    os_ << head;
    width_ = head.size();
  }
  void token(const std::string& tok) {
    if (width_ + 1 + tok.size() > kMaxLine && width_ > 0) {
      os_ << "\n  ";
      width_ = 2;
    } else {
      os_ << ' ';
      ++width_;
    }
    os_ << tok;
    width_ += tok.size();
  }
  void end() {
    os_ << '\n';
    width_ = 0;
  }

 private:
  std::ostringstream& os_;
  std::size_t width_ = 0;
};

void write_terms(LineWriter& w, const std::vector<Term>& terms, const std::vector<std::string>& names) {
  if (terms.empty()) {
    // LP syntax needs at least one term; a zero multiple of the first column.
    w.token("0");
    w.token(names.empty() ? "_dummy" : names.front());
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    const double mag = std::abs(t.coef);
    std::string tok;
    if (t.coef < 0) {
      tok = "-";
    } else if (!first) {
      tok = "+";
    }
    if (!tok.empty()) w.token(tok);
    if (mag != 1.0) w.token(format_number(mag));
    w.token(names[t.var]);
    first = false;
  }
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) return "0";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const double mag = std::abs(value);
  auto res = mag >= 1e-4 && mag < 1e15 ? std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed)
                                       : std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

LpExport export_model(const MilpModel& model) {
  model.validate();
  LpExport out;
  std::vector<std::string> var_names;
  for (const auto& v : model.variables()) var_names.push_back(v.name);
  std::vector<std::string> row_names;
  for (const auto& c : model.constraints()) row_names.push_back(c.name);
  const auto vars = assign_names(var_names, out.renamed);
  const auto rows = assign_names(row_names, out.renamed);

  std::ostringstream os;
  LineWriter w(os);
  os << "Minimize\n";
  std::vector<Term> objective;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.objective()[j] != 0.0) objective.push_back({j, model.objective()[j]});
  }
  w.start(" obj:");
  write_terms(w, objective, vars);
  w.end();

  os << "Subject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraint(i);
    w.start(" " + rows[i] + ":");
    write_terms(w, c.terms, vars);
    w.token(to_string(c.sense));
    w.token(format_number(c.rhs));
    w.end();
  }

  os << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variable(j);
    const std::string& n = vars[j];
    if (v.kind == VarKind::kBinary) {
      if (v.lower == v.upper) os << ' ' << n << " = " << format_number(v.lower) << '\n';
      continue;
    }
    const bool lo_inf = std::isinf(v.lower);
    const bool up_inf = std::isinf(v.upper);
    if (lo_inf && up_inf) {
      os << ' ' << n << " free\n";
    } else if (v.lower == v.upper) {
      os << ' ' << n << " = " << format_number(v.lower) << '\n';
    } else if (lo_inf) {
      os << " -inf <= " << n << " <= " << format_number(v.upper) << '\n';
    } else if (up_inf) {
      if (v.lower != 0.0) os << ' ' << n << " >= " << format_number(v.lower) << '\n';
    } else {
      os << ' ' << format_number(v.lower) << " <= " << n << " <= " << format_number(v.upper) << '\n';
    }
  }

  std::vector<std::string> binaries;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).kind == VarKind::kBinary) binaries.push_back(vars[j]);
  }
  if (!binaries.empty()) {
    os << "Binaries\n";
    w.start("");
    for (const auto& b : binaries) w.token(b);
    w.end();
  }
  os << "End\n";
  out.text = os.str();
  return out;
}

std::map<std::string, double> read_solution_csv(std::istream& in, const std::map<std::string, std::string>& renamed) {
  std::map<std::string, std::string> back;
  for (const auto& [orig, written] : renamed) back.emplace(written, orig);

  std::map<std::string, double> out;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "variable,value") throw ParseError("solution csv line 1: expected header variable,value");
      header = true;
      continue;
    }
    // Names may contain commas (x(p,v,t)), so split at the last one.
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ParseError("solution csv line " + std::to_string(lineno) + ": missing comma");
    std::string name = line.substr(0, comma);
    const std::string num = line.substr(comma + 1);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      throw ParseError("solution csv line " + std::to_string(lineno) + ": bad value '" + num + "'");
    }
    if (auto it = back.find(name); it != back.end()) name = it->second;
    if (!out.emplace(name, value).second) {
      throw ParseError("solution csv line " + std::to_string(lineno) + ": duplicate variable " + name);
    }
  }
  if (!header) throw ParseError("solution csv is empty");
  return out;
}

}  // namespace tfsp::milp
