// agentgraph: benchmark grid, summaries, transfer evaluation and domain export.

#include "agentgraph/bench/bench.hpp"
#include "agentgraph/errors.hpp"
#include "agentgraph/transfer/checkpoint.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace agentgraph;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::vector<std::string> model_names() {
  std::vector<std::string> out;
  for (ModelKind m : all_models()) out.emplace_back(to_string(m));
  return out;
}

// Unknown domain names are reported with every selectable name, including --domain-file ones.
void check_domains(const std::vector<std::string>& names, const DomainRegistry& reg) {
  const auto valid = reg.names();
  for (const auto& n : names)
    if (std::find(valid.begin(), valid.end(), n) == valid.end())
      throw CLI::ValidationError("--domain", "'" + n + "' is not one of: " + join(valid));
}

std::int64_t seed_offset_from_env() {
  const char* v = std::getenv("AGENTGRAPH_SEED_OFFSET");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long long x = std::strtoll(v, &end, 10);
  if (*end != '\0' || x < 0) throw CLI::ValidationError("AGENTGRAPH_SEED_OFFSET", "expected a non-negative integer");
  return x;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured multi-agent deep Q-learning for slot-filling dialogue"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Train a (domain, env, model, seed) grid and summarize it");
  std::vector<std::string> domains{"CR3", "SFR6", "LAP11"}, domain_files;
  std::vector<int> envs{1, 2, 3, 4, 5, 6};
  std::vector<std::string> models{"fm-dgnn"};
  std::string seeds = "0..9", config_path;
  std::optional<int> dialogues, eval_every, eval_dialogues, checkpoint_every;
  std::optional<std::string> transfer_from;
  std::string out_dir = "runs";
  int workers = 1;
  std::vector<int> marks{1000, 4000};
  bool quick = false, no_checkpoints = false, double_dqn = false;
  bench->add_option("--domain", domains, "Domains (CR3, SFR6, LAP11 or a --domain-file name)")->delimiter(',');
  bench->add_option("--domain-file", domain_files, "Extra domain JSON files")->check(CLI::ExistingFile);
  bench->add_option("--env", envs, "Environments 1..6")->delimiter(',')->check(CLI::Range(1, kEnvironmentCount));
  bench->add_option("--model", models, "Models")->delimiter(',')->check(CLI::IsMember(model_names()));
  bench->add_option("--seeds", seeds, "Seed range A..B")->capture_default_str();
  bench->add_option("--dialogues", dialogues, "Training dialogues per run")->check(CLI::NonNegativeNumber);
  bench->add_option("--eval-every", eval_every, "Dialogues between evaluations")->check(CLI::PositiveNumber);
  bench->add_option("--eval-dialogues", eval_dialogues, "Dialogues per evaluation")->check(CLI::PositiveNumber);
  bench->add_option("--checkpoint-every", checkpoint_every, "Also checkpoint every N dialogues")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--transfer-from", transfer_from, "Initialize every run from this checkpoint")
      ->check(CLI::ExistingFile);
  bench->add_option("--out", out_dir, "Output directory")->capture_default_str();
  bench->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--config", config_path, "JSON with train/gnn/mlp overrides")->check(CLI::ExistingFile);
  bench->add_option("--marks", marks, "Summary marks (dialogues)")->delimiter(',');
  bench->add_flag("--quick", quick, "Desk-scale mode: seeds 0..2, 100 eval dialogues");
  bench->add_flag("--double-dqn", double_dqn, "Double-DQN target selection");
  bench->add_flag("--no-checkpoints", no_checkpoints, "Skip writing checkpoints");

  // summarize
  auto* summarize_cmd = app.add_subcommand("summarize", "Aggregate run CSVs in a directory");
  std::string run_dir;
  summarize_cmd->add_option("dir", run_dir, "Run directory")->required();
  summarize_cmd->add_option("--marks", marks, "Marks (dialogues)")->delimiter(',');

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Greedy evaluation of a checkpoint, e.g. zero-shot transfer");
  std::string ckpt_path, eval_domain = "CR3";
  int eval_env = 1, eval_n = 500;
  std::uint64_t eval_seed = 0;
  bool with_random = false;
  eval_cmd->add_option("checkpoint", ckpt_path, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--domain", eval_domain, "Target domain")->capture_default_str();
  eval_cmd->add_option("--domain-file", domain_files, "Extra domain JSON files")->check(CLI::ExistingFile);
  eval_cmd->add_option("--env", eval_env, "Environment")->check(CLI::Range(1, kEnvironmentCount));
  eval_cmd->add_option("--dialogues", eval_n, "Episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_seed, "Seed");
  eval_cmd->add_flag("--random-baseline", with_random, "Also report the random masked policy");

  // export-domain
  auto* export_cmd = app.add_subcommand("export-domain", "Write a built-in domain as JSON (template for --domain-file)");
  std::string export_name, export_path;
  export_cmd->add_option("name", export_name, "CR3, SFR6 or LAP11")->required()->check(CLI::IsMember({"CR3", "SFR6", "LAP11"}));
  export_cmd->add_option("-o,--output", export_path, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    DomainRegistry registry;
    for (const auto& f : domain_files) registry.add_file(f);

    if (*bench) {
      check_domains(domains, registry);
      BenchOptions o;
      o.domains = domains;
      o.envs = envs;
      o.models.clear();
      for (const auto& m : models) o.models.push_back(parse_model(m));
      std::tie(o.seed_first, o.seed_last) = parse_seed_range(seeds);
      if (quick) {
        if (bench->count("--seeds") == 0) std::tie(o.seed_first, o.seed_last) = std::pair{0, 2};
        o.train.eval_dialogues = 100;
      }
      o.seed_offset = seed_offset_from_env();
      if (!config_path.empty()) apply_config(read_json(config_path), o.train, o.model);
      if (dialogues) o.train.train_dialogues = *dialogues;
      if (eval_every) o.train.eval_every = *eval_every;
      if (eval_dialogues) o.train.eval_dialogues = *eval_dialogues;
      if (checkpoint_every) o.train.checkpoint_every = *checkpoint_every;
      if (double_dqn) o.train.double_dqn = true;
      o.train.validate();
      o.transfer_from = transfer_from;
      o.out_dir = out_dir;
      o.workers = workers;
      o.marks = marks;
      o.save_checkpoints = !no_checkpoints;
      run_benchmark(o, registry, std::cout);
    } else if (*summarize_cmd) {
      const auto rows = summarize(run_dir, marks);
      write_summary_csv(run_dir + "/summary.csv", rows);
      print_summary(std::cout, rows);
    } else if (*eval_cmd) {
      check_domains({eval_domain}, registry);
      const Domain& d = registry.get(eval_domain);
      const Checkpoint ck = read_checkpoint(ckpt_path);
      const QNetwork net(ck.model, gnn_config_for(d, ck.gnn), ck.mlp);
      Rng init(eval_seed);
      auto imported = import_policy(ck, net, init);
      for (const auto& w : imported.warnings) std::cerr << "warning: " << w << '\n';
      DialogueEnv env(d, make_task(eval_env));
      Rng rng(eval_seed);
      const auto r = evaluate(net, imported.stores, env, eval_n, rng);
      std::cout << ck.domain << " -> " << d.name() << " env " << eval_env << ": success " << r.success_rate
                << " avg reward " << r.avg_reward << '\n';
      if (with_random) {
        Rng rr(eval_seed);
        const auto b = evaluate_random(env, eval_n, rr);
        std::cout << "random masked policy: success " << b.success_rate << " avg reward " << b.avg_reward << '\n';
      }
    } else if (*export_cmd) {
      const auto j = domain_to_json(builtin_domain(parse_domain(export_name)));
      if (export_path.empty()) {
        std::cout << j.dump(1) << '\n';
      } else {
        std::ofstream out(export_path);
        if (!(out << j.dump(1) << '\n')) throw CheckpointError("cannot write " + export_path);
      }
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
