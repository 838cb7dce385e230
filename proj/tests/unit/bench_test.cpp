#include "agentgraph/bench/bench.hpp"
#include "agentgraph/errors.hpp"
#include "agentgraph/transfer/checkpoint.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace agentgraph;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("agentgraph_bench_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_run(const fs::path& dir, int seed, const std::vector<CurvePoint>& curve, int env = 3) {
  const RunCell cell{"SFR6", env, ModelKind::FmDgnn, seed};
  write_curve_csv((dir / (cell.stem() + ".csv")).string(), curve, cell);
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BenchOptions tiny_options(const fs::path& out) {
  BenchOptions o;
  o.domains = {"CR3"};
  o.envs = {1};
  o.seed_first = 0;
  o.seed_last = 1;
  o.train.train_dialogues = 6;
  o.train.eval_every = 3;
  o.train.eval_dialogues = 5;
  o.train.batch_size = 4;
  o.model.gnn.dims.s_hidden = 6;
  o.model.gnn.dims.i_hidden = 6;
  o.model.gnn.dims.s_comm = 4;
  o.model.gnn.dims.i_comm = 4;
  o.marks = {3, 6};
  o.out_dir = out.string();
  return o;
}

}  // namespace

TEST(CurveCsv, HeaderIsExact) {
  const auto dir = fresh_dir("header");
  write_run(dir, 0, {{0, 0.5, 1.25}});
  std::ifstream in(dir / "SFR6_env3_fm-dgnn_seed0.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "dialogues,success_rate,avg_reward,model,domain,env,seed");
  EXPECT_EQ(row, "0,0.5,1.25,fm-dgnn,SFR6,3,0");
}

TEST(Grid, DefaultsEnumerateEighteenTasks) {
  BenchOptions o;
  std::set<std::pair<std::string, int>> tasks;
  for (const auto& c : enumerate_grid(o)) tasks.insert({c.domain, c.env});
  EXPECT_EQ(tasks.size(), 18u);
  EXPECT_EQ(enumerate_grid(o).size(), 180u);
}

TEST(Grid, SeedOffsetShiftsEverySeed) {
  BenchOptions o;
  o.domains = {"CR3"};
  o.envs = {1};
  o.seed_first = 0;
  o.seed_last = 2;
  o.seed_offset = 100;
  const auto cells = enumerate_grid(o);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells.front().seed, 100);
  EXPECT_EQ(cells.back().seed, 102);
}

TEST(Grid, EnvFiveIsUnfriendlyWithMasks) {
  const auto t = make_task(5);
  EXPECT_EQ(t.ser, 0.15);
  EXPECT_TRUE(t.masks);
  EXPECT_EQ(t.user, UserKind::Unfriendly);
}

TEST(SeedRange, Parsing) {
  EXPECT_EQ(parse_seed_range("0..2"), std::make_pair(0, 2));
  EXPECT_EQ(parse_seed_range("7"), std::make_pair(7, 7));
  EXPECT_THROW(parse_seed_range("3..1"), ConfigurationError);
  EXPECT_THROW(parse_seed_range("a..b"), ConfigurationError);
  EXPECT_THROW(parse_seed_range("1..2x"), ConfigurationError);
  EXPECT_THROW(parse_seed_range(""), ConfigurationError);
}

TEST(Summarize, SingleRunHasZeroStd) {
  const auto dir = fresh_dir("single");
  write_run(dir, 0, {{0, 0.1, -5}, {1000, 0.7, 8}, {4000, 0.9, 12}});
  const auto rows = summarize(dir.string(), {1000, 4000});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].runs, 1);
  EXPECT_EQ(rows[0].success_std, 0.0);
  EXPECT_EQ(rows[1].reward_std, 0.0);
  EXPECT_EQ(rows[1].success_mean, 0.9);
}

TEST(Summarize, MeanOfTwoRuns) {
  const auto dir = fresh_dir("two");
  write_run(dir, 0, {{1000, 0.8, 10}});
  write_run(dir, 1, {{1000, 0.9, 12}});
  const auto rows = summarize(dir.string(), {1000});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].success_mean, 0.85);
  EXPECT_DOUBLE_EQ(rows[0].success_std, 0.05);
  EXPECT_DOUBLE_EQ(rows[0].reward_mean, 11.0);
  EXPECT_FALSE(rows[0].incomplete());
}

TEST(Summarize, TruncatedRunIsFlagged) {
  const auto dir = fresh_dir("truncated");
  write_run(dir, 0, {{1000, 0.8, 10}, {4000, 0.9, 12}});
  write_run(dir, 1, {{1000, 0.6, 6}});
  const auto rows = summarize(dir.string(), {1000, 4000});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].incomplete());
  EXPECT_TRUE(rows[1].incomplete());
  EXPECT_EQ(rows[1].runs, 1);
  EXPECT_EQ(rows[1].missing, 1);
  std::ostringstream table;
  print_summary(table, rows);
  EXPECT_NE(table.str().find("INCOMPLETE"), std::string::npos);
}

TEST(Summarize, TasksAreKeptApart) {
  const auto dir = fresh_dir("tasks");
  write_run(dir, 0, {{1000, 0.8, 10}}, 1);
  write_run(dir, 0, {{1000, 0.2, 10}}, 2);
  EXPECT_EQ(summarize(dir.string(), {1000}).size(), 2u);
}

TEST(Summarize, EmptyDirectoryIsAnError) {
  const auto dir = fresh_dir("empty");
  EXPECT_THROW(summarize(dir.string(), {1000}), UsageError);
  EXPECT_THROW(summarize((dir / "missing").string(), {1000}), UsageError);
}

TEST(Config, AppliesSectionsAndRejectsUnknownKeys) {
  TrainConfig t;
  ModelOverrides m;
  apply_config(nlohmann::json::parse(R"({"train": {"lr": 0.002}, "gnn": {"s_hidden": 12}, "mlp": {"hidden1": 50}})"), t, m);
  EXPECT_EQ(t.lr, 0.002);
  EXPECT_EQ(m.gnn.dims.s_hidden, 12);
  EXPECT_EQ(m.mlp.hidden1, 50);
  EXPECT_THROW(apply_config(nlohmann::json::parse(R"({"optimizer": {}})"), t, m), ConfigurationError);
  EXPECT_THROW(apply_config(nlohmann::json::parse(R"({"gnn": {"depth": 2}})"), t, m), ConfigurationError);
  EXPECT_THROW(apply_config(nlohmann::json::parse(R"({"gnn": {"s_hidden": "x"}})"), t, m), ConfigurationError);
}

TEST(Registry, BuiltinsAndUnknownNames) {
  DomainRegistry r;
  EXPECT_EQ(r.get("LAP11").informable_count(), 11);
  EXPECT_THROW(r.get("HOTELS"), ConfigurationError);
}

TEST(Benchmark, WritesCurvesCheckpointsAndSummary) {
  const auto dir = fresh_dir("run");
  BenchOptions o = tiny_options(dir);
  o.workers = 2;
  std::ostringstream log;
  const auto rows = run_benchmark(o, DomainRegistry{}, log);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].runs, 2);
  for (int s : {0, 1}) {
    const std::string stem = "CR3_env1_fm-dgnn_seed" + std::to_string(s);
    EXPECT_TRUE(fs::exists(dir / (stem + ".csv")));
    EXPECT_TRUE(fs::exists(dir / (stem + ".ckpt.json")));
  }
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));

  // Same grid on one worker gives byte-identical curves.
  const auto dir2 = fresh_dir("run_serial");
  BenchOptions serial = tiny_options(dir2);
  run_benchmark(serial, DomainRegistry{}, log);
  for (int s : {0, 1}) {
    const std::string name = "CR3_env1_fm-dgnn_seed" + std::to_string(s) + ".csv";
    EXPECT_EQ(read_all(dir / name), read_all(dir2 / name));
  }
}

TEST(Benchmark, TransferCurveStartsFromTheImportedPolicy) {
  const auto dir = fresh_dir("transfer");
  BenchOptions o = tiny_options(dir);
  o.domains = {"SFR6"};
  o.seed_last = 0;
  std::ostringstream log;
  run_benchmark(o, DomainRegistry{}, log);
  const auto ckpt = (dir / "SFR6_env1_fm-dgnn_seed0.ckpt.json").string();

  const auto out = fresh_dir("transfer_target");
  BenchOptions t = tiny_options(out);
  t.seed_last = 0;
  t.transfer_from = ckpt;
  t.model.gnn.dims.s_hidden = 99;  // ignored: the checkpoint's shape wins
  run_benchmark(t, DomainRegistry{}, log);

  // The 0-dialogue point is the imported policy evaluated before any update.
  const Checkpoint ck = read_checkpoint(ckpt);
  const Domain& cr3 = builtin_domain(DomainId::CR3);
  Rng rng(0);
  const StoreSet stores = import_policy(ck, QNetwork(ModelKind::FmDgnn, gnn_config_for(cr3, ck.gnn), ck.mlp), rng).stores;
  TrainConfig zero = t.train;
  zero.train_dialogues = 0;
  const auto expected = run_training(cr3, make_task(1), ModelKind::FmDgnn, zero, 0, &stores, ck.gnn, {}, ck.mlp);
  std::ifstream in(out / "CR3_env1_fm-dgnn_seed0.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  std::ostringstream want;
  want << "0," << expected.curve[0].success_rate << ',' << expected.curve[0].avg_reward << ",fm-dgnn,CR3,1,0";
  EXPECT_EQ(first, want.str());
  EXPECT_TRUE(fs::exists(out / "CR3_env1_fm-dgnn_seed0.ckpt.json"));
}
