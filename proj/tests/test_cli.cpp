#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support.hpp"

using schedpred::testing::slurp;
using schedpred::testing::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "schedpred");
  std::ostringstream out, err;
  const int code = schedpred::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream(p) << body;
}

// gen-trace + analyze into dir/trace and dir/analysis.
void make_analysis(const TempDir& dir, int n_jobs = 60) {
  write_file(dir / "gen.json", R"({"n_jobs": )" + std::to_string(n_jobs) +
                                   R"(, "tasks_per_job": {"kind": "uniform", "min": 1, "max": 15}, "seed": 3})");
  ASSERT_EQ(run({"gen-trace", "--config", (dir / "gen.json").string(), "--out", (dir / "trace").string()}).code, 0);
  const auto trace = dir / "trace";
  ASSERT_EQ(run({"analyze", "--task-events", (trace / "task_events.csv").string(), "--job-events",
                 (trace / "job_events.csv").string(), "--usage", (trace / "task_usage.csv").string(),
                 "--seed", "1", "--out", (dir / "analysis").string()})
                .code,
            0);
}

}  // namespace

TEST(Cli, GenTraceIsDeterministic) {
  TempDir dir("cli_gen");
  write_file(dir / "gen.json", R"({"n_jobs": 20, "tasks_per_job": 4})");
  for (const char* sub : {"a", "b"}) {
    const auto r = run({"gen-trace", "--config", (dir / "gen.json").string(), "--seed", "1", "--out", (dir / sub).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"task_events.csv", "job_events.csv", "task_usage.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 1);
}

TEST(Cli, GenTraceRejectsZeroJobs) {
  TempDir dir("cli_zero");
  write_file(dir / "gen.json", R"({"n_jobs": 0})");
  const auto r = run({"gen-trace", "--config", (dir / "gen.json").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ConfigError"), std::string::npos);
}

TEST(Cli, AnalyzeGeneratedTrace) {
  TempDir dir("cli_analyze");
  make_analysis(dir);
  const auto report = nlohmann::json::parse(slurp(dir / "analysis" / "analyze_report.json"));
  EXPECT_EQ(report["command"], "analyze");
  EXPECT_EQ(report["seed"], 1);
  EXPECT_TRUE(report.contains("version"));
  EXPECT_TRUE(report.contains("config"));
  const auto& rows = report["task_summary"]["rows"];
  EXPECT_EQ(rows.size(), 6u);
  std::size_t total = 0;
  for (const auto& row : rows) total += row["count"].get<std::size_t>();
  EXPECT_EQ(total, report["task_summary"]["total"].get<std::size_t>());
  for (const char* f : {"task_attributes.csv", "job_attributes.csv", "task_times.csv", "job_times.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "analysis" / f)) << f;
  }
}

TEST(Cli, AnalyzeEmptyDirectory) {
  TempDir dir("cli_empty");
  std::filesystem::create_directories(dir / "in");
  const auto r = run({"analyze", "--task-events", (dir / "in").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no input files"), std::string::npos);
}

TEST(Cli, TrainWritesModelsAndImportance) {
  TempDir dir("cli_train");
  make_analysis(dir);
  const auto r = run({"train", "--attributes", (dir / "analysis" / "task_attributes.csv").string(),
                      "--models", "forest,tree,glm", "--seed", "4", "--out", (dir / "model").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(dir / "model" / "train_report.json"));
  for (const char* kind : {"forest", "tree", "glm"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "model" / ("model_" + std::string(kind) + ".json")));
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "model" / "importance.csv"));
  EXPECT_EQ(report["seed"], 4);
}

TEST(Cli, TrainTooFewSamples) {
  TempDir dir("cli_few");
  make_analysis(dir, 1);
  const auto r = run({"train", "--attributes", (dir / "analysis" / "task_attributes.csv").string(),
                      "--folds", "1000", "--out", (dir / "model").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("TooFewSamples"), std::string::npos);
}

TEST(Cli, ReportsAreByteIdenticalAcrossRunsAndWorkers) {
  TempDir dir("cli_det");
  make_analysis(dir);
  const auto attrs = (dir / "analysis" / "task_attributes.csv").string();
  ASSERT_EQ(run({"train", "--attributes", attrs, "--seed", "2", "--workers", "1", "--out", (dir / "t1").string()}).code, 0);
  ASSERT_EQ(run({"train", "--attributes", attrs, "--seed", "2", "--workers", "3", "--out", (dir / "t2").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "t1" / "train_report.json"), slurp(dir / "t2" / "train_report.json"));
  EXPECT_EQ(slurp(dir / "t1" / "model_forest.json"), slurp(dir / "t2" / "model_forest.json"));

  for (const char* sub : {"s1", "s2"}) {
    ASSERT_EQ(run({"simulate", "--builtin", "mix", "--policy", "predictive", "--seed", "5", "--out", (dir / sub).string()}).code, 0);
  }
  EXPECT_EQ(slurp(dir / "s1" / "sim_report.json"), slurp(dir / "s2" / "sim_report.json"));
  EXPECT_EQ(slurp(dir / "s1" / "ledger.csv"), slurp(dir / "s2" / "ledger.csv"));
}

TEST(Cli, SimulateAndCompare) {
  TempDir dir("cli_sim");
  ASSERT_EQ(run({"simulate", "--builtin", "batch", "--policy", "baseline", "--seed", "1", "--out", (dir / "b").string()}).code, 0);
  const auto r = run({"simulate", "--builtin", "batch", "--policy", "predictive", "--seed", "1", "--out", (dir / "p").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sim = nlohmann::json::parse(slurp(dir / "p" / "sim_report.json"));
  EXPECT_EQ(sim["result"]["n_tasks"], 800);
  EXPECT_EQ(sim["result"]["n_jobs"], 110);

  ASSERT_EQ(run({"compare", "--baseline", (dir / "b" / "ledger.csv").string(), "--predictive",
                 (dir / "p" / "ledger.csv").string(), "--out", (dir / "c").string()})
                .code,
            0);
  const auto cmp = nlohmann::json::parse(slurp(dir / "c" / "compare_report.json"));
  EXPECT_GT(cmp["improvement"]["delta_finished_tasks"].get<long>(), 0);

  ASSERT_EQ(run({"compare", "--baseline", (dir / "b" / "ledger.csv").string(), "--predictive",
                 (dir / "b" / "ledger.csv").string(), "--out", (dir / "self").string()})
                .code,
            0);
  const auto self = nlohmann::json::parse(slurp(dir / "self" / "compare_report.json"));
  EXPECT_EQ(self["improvement"]["delta_finished_tasks"], 0);
  EXPECT_EQ(self["improvement"]["flipped_to_failure_count"], 0);
}

TEST(Cli, CompareDisjointLedgers) {
  TempDir dir("cli_disjoint");
  ASSERT_EQ(run({"simulate", "--builtin", "single", "--seed", "1", "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(run({"simulate", "--builtin", "mix", "--seed", "1", "--out", (dir / "b").string()}).code, 0);
  const auto r = run({"compare", "--baseline", (dir / "a" / "ledger.csv").string(), "--predictive",
                      (dir / "b" / "ledger.csv").string(), "--out", (dir / "c").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("LedgerMismatch"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"simulate"}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
}
