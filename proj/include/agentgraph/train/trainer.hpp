#pragma once

#include "agentgraph/dip/dip.hpp"
#include "agentgraph/env/dialogue_env.hpp"
#include "agentgraph/policy/q_network.hpp"
#include "agentgraph/train/replay_pool.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace agentgraph {

struct TrainConfig {
  double gamma = 0.99;
  double lr = 1e-3;
  int batch_size = 64;
  int replay_capacity = 10000;
  int target_sync_period = 200;  // gradient steps between target copies
  double epsilon_start = 0.95;
  double epsilon_end = 0.05;
  double epsilon_anneal_fraction = 0.8;  // of train_dialogues
  int train_dialogues = 4000;
  int eval_every = 200;
  int eval_dialogues = 500;
  bool double_dqn = false;
  int checkpoint_every = 0;  // dialogues; 0 disables the callback

  void validate() const;
  double epsilon(int dialogues_seen) const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Unknown keys are a ConfigurationError naming the key.
void from_json(const nlohmann::json& j, TrainConfig& c);

/// r when terminal, else r + gamma * max over unmasked next_q.
double td_target(double r, const VectorXd& next_q, const ActionMask& next_mask, bool terminal, double gamma);

/// Copies every policy value into the target (bit-exact). Mismatched layouts are a ConfigurationError.
void sync_target(const StoreSet& policy, StoreSet& target);

/// Network, its parameters, target copy and optimizers.
struct Learner {
  Learner(QNetwork net, StoreSet params, const TrainConfig& cfg);

  QNetwork net;
  StoreSet policy;
  StoreSet target;
  std::vector<Adam> optimizers;  // one per store
  long gradient_steps = 0;
};

/// One DQN update on a uniform minibatch. Returns the batch loss, or nothing (and changes
/// nothing) when the pool holds fewer than batch_size transitions. Syncs the target every
/// target_sync_period steps.
std::optional<double> train_step(Learner& learner, const ReplayPool& pool, const TrainConfig& cfg, Rng& rng);

/// Greedy masked action.
Index greedy_action(const QNetwork& net, StoreSet& stores, const NodeInputs& x, const ActionMask& mask);
/// With probability epsilon a uniform unmasked action, else greedy.
Index epsilon_greedy_action(const QNetwork& net, StoreSet& stores, const NodeInputs& x, const ActionMask& mask,
                            double epsilon, Rng& rng);
/// Uniform over unmasked actions.
Index random_action(const ActionMask& mask, Rng& rng);

struct EvalResult {
  double success_rate = 0.0;
  double avg_reward = 0.0;
};

/// Greedy (epsilon = 0) episodes; parameters are only read.
EvalResult evaluate(const QNetwork& net, StoreSet& stores, DialogueEnv& env, int dialogues, Rng& rng);
/// Baseline: uniform random masked policy.
EvalResult evaluate_random(DialogueEnv& env, int dialogues, Rng& rng);

struct CurvePoint {
  int dialogues = 0;
  double success_rate = 0.0;
  double avg_reward = 0.0;
};

struct TrainingRun {
  std::vector<CurvePoint> curve;
  StoreSet policy;
};

/// Network dimensions for a domain: DIP input sizes and one S-node per informable slot.
GnnConfig gnn_config_for(const Domain& d, GnnConfig base = {});

using CheckpointCallback = std::function<void(int dialogues, const StoreSet& policy)>;

/// Trains for cfg.train_dialogues episodes and evaluates at 0, every eval_every dialogues and at
/// the end. `init` (optional) replaces the random initialization, e.g. an imported policy; its
/// block names and shapes must match the network.
TrainingRun run_training(const Domain& domain, const TaskConfig& task, ModelKind model, const TrainConfig& cfg,
                         std::uint64_t seed, const StoreSet* init = nullptr, const GnnConfig& base = {},
                         const CheckpointCallback& on_checkpoint = {}, const MlpConfig& mlp = {});

}  // namespace agentgraph
