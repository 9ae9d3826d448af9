#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "support/fixtures.hpp"
#include "tfsp/cli.hpp"
#include "tfsp/downsizing.hpp"
#include "tfsp/evaluation.hpp"
#include "tfsp/formulations.hpp"
#include "tfsp/milp/lp_writer.hpp"
#include "tfsp/milp/solver.hpp"

namespace tfsp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using oracle::fixture_path;

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("tfsp_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  json read_json(const std::string& name) const { return json::parse(read_text_file(dir_ / name)); }

  Result ok(std::vector<std::string> args) {
    auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return r;
  }

  fs::path dir_;
  const std::string instance_ = fixture_path("two_pattern_small.json");
  const std::string scenarios_ = fixture_path("scenarios_small.csv");
};

TEST_F(Cli, RobustAtZeroEqualsNominalAtMean) {
  save_stats(demand_stats(ScenarioSet::uniform(load_scenarios(scenarios_))), path("stats.csv"));
  ok({"solve", "--model", "nominal", "--instance", instance_, "--stats", path("stats.csv"), "--output-dir", path("nom")});
  ok({"solve", "--model", "robust", "--gamma-u", "0", "--instance", instance_, "--stats", path("stats.csv"),
      "--output-dir", path("rob")});
  const double a = read_json("nom/schedule.json")["solution"]["objective"];
  const double b = read_json("rob/schedule.json")["solution"]["objective"];
  EXPECT_NEAR(a, b, 1e-6 * std::max(1.0, a));
  const auto manifest = read_json("rob/manifest.json");
  EXPECT_EQ(manifest["config"]["gamma-u"], 0.0);
  EXPECT_TRUE(manifest["manifest"].contains("auxiliaries"));
}

TEST_F(Cli, RobustWithoutGammaIsUsageError) {
  const auto r = run({"solve", "--model", "robust", "--instance", instance_, "--scenarios", scenarios_});
  EXPECT_EQ(r.code, 2);
  const auto e = json::parse(r.err);
  EXPECT_EQ(e["error"]["kind"], "usage_error");
  EXPECT_EQ(e["error"]["command"], "solve");
  EXPECT_EQ(run({"solve", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"solve", "--model", "nominal", "--gamma-u", "1", "--instance", instance_, "--scenarios", scenarios_,
                 "--scenario-id", "s1"})
                .code,
            2);
  // Two scenarios and no choice among them.
  EXPECT_EQ(run({"solve", "--instance", instance_, "--scenarios", scenarios_}).code, 2);
  EXPECT_EQ(run({"solve", "--instance", instance_, "--scenarios", scenarios_, "--gamma", "abc"}).code, 2);
}

TEST_F(Cli, InputErrorsAreReportedAsJson) {
  const auto r = run({"solve", "--instance", path("missing.json"), "--scenarios", scenarios_, "--scenario-id", "s1"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NO_THROW(json::parse(r.err));
  const auto bad = run({"solve", "--instance", fixture_path("bad_order.json"), "--scenarios", scenarios_});
  EXPECT_EQ(bad.code, 3) << bad.err;
  EXPECT_EQ(run({"solve", "--instance", instance_, "--scenarios", scenarios_, "--scenario-id", "zz"}).code, 3);
}

TEST_F(Cli, ConfigPrecedence) {
  write_text_file(path("cfg.json"), json({{"instance", instance_},
                                          {"scenarios", scenarios_},
                                          {"scenario-id", "s1"},
                                          {"gamma", 2.0},
                                          {"budget", 2.0}})
                                        .dump());
  ok({"solve", "--config", path("cfg.json"), "--gamma", "3", "--output-dir", path("a")});
  auto c = read_json("a/schedule.json")["config"];
  EXPECT_EQ(c["gamma"], 3.0);
  EXPECT_EQ(c["budget"], 2.0);
  EXPECT_EQ(c["big-m"], 100000.0);  // from the instance
  EXPECT_FALSE(c.contains("output-dir"));
  ok({"solve", "--config", path("cfg.json"), "--output-dir", path("b")});
  EXPECT_EQ(read_json("b/schedule.json")["config"]["gamma"], 2.0);
  ok({"solve", "--instance", instance_, "--scenarios", scenarios_, "--scenario-id", "s1", "--output-dir", path("c")});
  EXPECT_EQ(read_json("c/schedule.json")["config"]["gamma"], 1.0);

  write_text_file(path("typo.json"), R"({"gamam": 1})");
  EXPECT_EQ(run({"solve", "--config", path("typo.json")}).code, 2);
  write_text_file(path("type.json"), R"({"gamma": "one"})");
  EXPECT_EQ(run({"solve", "--config", path("type.json")}).code, 2);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  // Inputs are named by path in the echoed config, so both runs use the same
  // directory and the first run's files are set aside.
  const std::string o = path("run");
  const std::vector<std::string> files{"scenarios.csv", "gen_demand.json", "schedule.json", "manifest.json",
                                       "evaluation.json", "evaluation.csv", "sweep.json", "sweep.csv", "sweep.svg"};
  for (int rep = 0; rep < 2; ++rep) {
    ok({"gen-demand", "--scenarios", scenarios_, "--beta", "4", "--seed", "7", "--count", "3", "--output-dir", o});
    ok({"solve", "--model", "stochastic", "--instance", instance_, "--scenarios", o + "/scenarios.csv",
        "--output-dir", o});
    ok({"evaluate", "--instance", instance_, "--schedule", o + "/schedule.json", "--scenarios", o + "/scenarios.csv",
        "--workers", rep == 0 ? "1" : "3", "--output-dir", o});
    ok({"sweep", "--parameter", "gamma", "--values", "0,1", "--instance", instance_, "--scenarios", scenarios_,
        "--scenario-id", "s1", "--output-dir", o});
    if (rep == 0) {
      fs::create_directories(dir_ / "first");
      for (const auto& f : files) fs::copy_file(dir_ / "run" / f, dir_ / "first" / f);
    }
  }
  for (const auto& f : files) EXPECT_EQ(read_text_file(dir_ / "first" / f), read_text_file(dir_ / "run" / f)) << f;
  // Scenario files differ between seeds.
  ok({"gen-demand", "--scenarios", scenarios_, "--beta", "4", "--seed", "8", "--output-dir", path("r3")});
  EXPECT_NE(read_text_file(dir_ / "run" / "scenarios.csv"), read_text_file(dir_ / "r3" / "scenarios.csv"));
}

TEST_F(Cli, ExportImportRoundTrip) {
  const std::vector<std::string> model{"--model", "nominal", "--instance", instance_, "--scenarios", scenarios_,
                                       "--scenario-id", "s2"};
  auto with = [&](std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  ok(with({"solve"}, with(model, {"--output-dir", path("embedded")})));
  ok(with({"export-lp"}, with(model, {"--output-dir", path("lp")})));
  const auto lp_text = read_text_file(dir_ / "lp" / "model.lp");
  EXPECT_NE(lp_text.find("Minimize"), std::string::npos);

  // Stand-in for an external solver: the same model solved here, written
  // under the exported names.
  const auto inst = load_instance(instance_);
  const auto sc = load_scenarios(scenarios_)[1];
  const auto built = build_nominal(inst, sc, inst.params, FlowSelection{reduce_positive(all_flows(inst), sc)});
  const auto lp = milp::export_model(built.model);
  EXPECT_EQ(lp.text, lp_text);
  const auto sol = milp::solve(built.model);
  std::ostringstream csv;
  csv << "variable,value\n";
  for (int j = 0; j < built.model.num_variables(); ++j) {
    auto name = built.model.variable(j).name;
    if (auto it = lp.renamed.find(name); it != lp.renamed.end()) name = it->second;
    if (sol.values[j] != 0.0) csv << name << "," << milp::format_number(sol.values[j]) << "\n";
  }
  write_text_file(path("solution.csv"), csv.str());
  ok(with({"import-solution"}, with(model, {"--solution", path("solution.csv"), "--output-dir", path("imported")})));
  EXPECT_EQ(read_json("imported/import_log.json")["feasible"], true);

  for (const auto* d : {"embedded", "imported"}) {
    ok({"evaluate", "--instance", instance_, "--schedule", path(std::string(d) + "/schedule.json"), "--scenarios",
        scenarios_, "--output-dir", path(d)});
  }
  EXPECT_EQ(read_json("embedded/evaluation.json")["reports"], read_json("imported/evaluation.json")["reports"]);
  EXPECT_EQ(read_text_file(dir_ / "embedded" / "evaluation.csv"), read_text_file(dir_ / "imported" / "evaluation.csv"));

  // A solution that breaks a row is rejected.
  write_text_file(path("bad.csv"), "variable,value\n");
  const auto r = run(with({"import-solution"}, with(model, {"--solution", path("bad.csv"), "--output-dir", path("bad")})));
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(read_json("bad/import_log.json")["feasible"], false);
}

TEST_F(Cli, CompareWritesTableRow) {
  ok({"solve", "--model", "stochastic", "--instance", instance_, "--scenarios", scenarios_, "--output-dir", path("s")});
  write_text_file(path("current.json"),
                  R"({"dispatches": [{"pattern": "local", "vehicle": "bus", "period": 1},
                                     {"pattern": "local", "vehicle": "bus", "period": 4}]})");
  const auto r = ok({"compare", "--instance", instance_, "--a", path("s/schedule.json"), "--b", path("current.json"),
                     "--baseline", path("current.json"), "--scenarios", fixture_path(""), "--output-dir", path("c")});
  const auto table = read_text_file(dir_ / "c" / "budget_table.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), budget_table_header());
  EXPECT_EQ(r.out.substr(r.out.size() - 4), "OPT\n");
  const auto j = read_json("c/comparison.json");
  EXPECT_EQ(j["versus_b"]["rows"].size(), 2u);
  EXPECT_EQ(j["versus_b"], j["versus_baseline"]);
  EXPECT_GE(j["versus_b"]["mean"]["wait_decrease_pct"].get<double>(), -1e9);
}

TEST_F(Cli, ReduceAndSweepOutputs) {
  ok({"reduce", "--scenarios", scenarios_, "--epsilon-grid", "0,0.5,1,2", "--output-dir", path("r")});
  const auto red = read_json("r/reduction.json");
  EXPECT_EQ(red["config"]["epsilon"], 0.05);
  EXPECT_EQ(red["report"]["mode"], "epsilon-threshold");
  EXPECT_EQ(red["curve"].size(), 4u);
  EXPECT_TRUE(fs::exists(dir_ / "r" / "reduced_stats.csv"));
  EXPECT_EQ(run({"reduce", "--output-dir", path("r2")}).code, 2);

  ok({"sweep", "--parameter", "gamma-u", "--values", "0,1", "--instance", instance_, "--scenarios", scenarios_,
      "--big-m", "1000", "--output-dir", path("g")});
  const auto sw = read_json("g/sweep.json");
  EXPECT_EQ(sw["sweep"]["rows"].size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "g" / "sweep.svg"));
  EXPECT_EQ(run({"sweep", "--parameter", "beta", "--instance", instance_}).code, 2);
}

}  // namespace
}  // namespace tfsp
