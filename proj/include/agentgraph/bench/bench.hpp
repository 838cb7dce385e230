#pragma once

#include "agentgraph/env/domain.hpp"
#include "agentgraph/policy/q_network.hpp"
#include "agentgraph/train/trainer.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentgraph {

inline constexpr const char* kCurveHeader = "dialogues,success_rate,avg_reward,model,domain,env,seed";

/// Resolves domain names: the three built-ins plus any loaded from files.
class DomainRegistry {
 public:
  DomainRegistry();
  /// Loads a JSON domain; its "name" becomes selectable. Returns that name.
  std::string add_file(const std::string& path);
  const Domain& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Domain> loaded_;
};

/// Network shape overrides read from a --config file.
struct ModelOverrides {
  GnnConfig gnn;
  MlpConfig mlp;
};

/// Parses {"train": {...}, "gnn": {...}, "mlp": {...}}; unknown keys are ConfigurationErrors.
void apply_config(const nlohmann::json& j, TrainConfig& train, ModelOverrides& model);

struct BenchOptions {
  std::vector<std::string> domains{"CR3", "SFR6", "LAP11"};
  std::vector<int> envs{1, 2, 3, 4, 5, 6};
  std::vector<ModelKind> models{ModelKind::FmDgnn};
  int seed_first = 0;
  int seed_last = 9;
  std::int64_t seed_offset = 0;  // AGENTGRAPH_SEED_OFFSET
  TrainConfig train;
  ModelOverrides model;
  std::optional<std::string> transfer_from;
  std::string out_dir = "runs";
  int workers = 1;
  std::vector<int> marks{1000, 4000};
  bool save_checkpoints = true;
};

struct RunCell {
  std::string domain;
  int env = 1;
  ModelKind model = ModelKind::FmDgnn;
  std::int64_t seed = 0;

  std::string stem() const;  // file name without extension
};

std::vector<RunCell> enumerate_grid(const BenchOptions& o);

/// "A..B" or a single integer.
std::pair<int, int> parse_seed_range(const std::string& text);

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve, const RunCell& cell);

/// Trains one cell and writes its curve (and checkpoint) into out_dir.
std::vector<CurvePoint> run_cell(const RunCell& cell, const BenchOptions& o, const DomainRegistry& domains);

struct SummaryRow {
  std::string domain;
  int env = 0;
  std::string model;
  int mark = 0;
  int runs = 0;      // runs that reached the mark
  int missing = 0;   // runs of this task that stop before the mark
  double success_mean = 0, success_std = 0;
  double reward_mean = 0, reward_std = 0;

  bool incomplete() const { return missing > 0; }
};

/// Aggregates every curve CSV in `run_dir` at each mark (population std across seeds).
/// An empty directory is a UsageError.
std::vector<SummaryRow> summarize(const std::string& run_dir, const std::vector<int>& marks);

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Runs the whole grid with up to o.workers threads, then writes summary.csv and prints the table.
std::vector<SummaryRow> run_benchmark(const BenchOptions& o, const DomainRegistry& domains, std::ostream& log);

}  // namespace agentgraph
