#include "agentgraph/train/trainer.hpp"

#include "agentgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace agentgraph {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigurationError("gamma must lie in (0, 1]");
  if (!(lr > 0.0)) throw ConfigurationError("lr must be > 0");
  if (batch_size < 1) throw ConfigurationError("batch_size must be >= 1");
  if (replay_capacity < batch_size) throw ConfigurationError("replay_capacity must be >= batch_size");
  if (target_sync_period < 1) throw ConfigurationError("target_sync_period must be >= 1");
  if (epsilon_start < 0 || epsilon_start > 1 || epsilon_end < 0 || epsilon_end > 1)
    throw ConfigurationError("epsilon bounds must lie in [0, 1]");
  if (epsilon_anneal_fraction < 0) throw ConfigurationError("epsilon_anneal_fraction must be >= 0");
  if (train_dialogues < 0 || eval_every < 1 || eval_dialogues < 1 || checkpoint_every < 0)
    throw ConfigurationError("dialogue counts must be positive");
}

double TrainConfig::epsilon(int seen) const {
  const double span = epsilon_anneal_fraction * train_dialogues;
  if (span <= 0 || seen >= span) return epsilon_end;
  const double frac = seen / span;
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"gamma", c.gamma},
       {"lr", c.lr},
       {"batch_size", c.batch_size},
       {"replay_capacity", c.replay_capacity},
       {"target_sync_period", c.target_sync_period},
       {"epsilon_start", c.epsilon_start},
       {"epsilon_end", c.epsilon_end},
       {"epsilon_anneal_fraction", c.epsilon_anneal_fraction},
       {"train_dialogues", c.train_dialogues},
       {"eval_every", c.eval_every},
       {"eval_dialogues", c.eval_dialogues},
       {"double_dqn", c.double_dqn},
       {"checkpoint_every", c.checkpoint_every}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  nlohmann::json defaults = c;
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw ConfigurationError("unknown training option '" + key + "'");
    if (value.type() != defaults[key].type() && !(value.is_number() && defaults[key].is_number()))
      throw ConfigurationError("training option '" + key + "' has the wrong type");
    defaults[key] = value;
  }
  c.gamma = defaults["gamma"];
  c.lr = defaults["lr"];
  c.batch_size = defaults["batch_size"];
  c.replay_capacity = defaults["replay_capacity"];
  c.target_sync_period = defaults["target_sync_period"];
  c.epsilon_start = defaults["epsilon_start"];
  c.epsilon_end = defaults["epsilon_end"];
  c.epsilon_anneal_fraction = defaults["epsilon_anneal_fraction"];
  c.train_dialogues = defaults["train_dialogues"];
  c.eval_every = defaults["eval_every"];
  c.eval_dialogues = defaults["eval_dialogues"];
  c.double_dqn = defaults["double_dqn"];
  c.checkpoint_every = defaults["checkpoint_every"];
}

double td_target(double r, const VectorXd& next_q, const ActionMask& next_mask, bool terminal, double gamma) {
  if (terminal) return r;
  return r + gamma * masked_max(next_q, next_mask);
}

void sync_target(const StoreSet& policy, StoreSet& target) {
  if (policy.size() != target.size()) throw ConfigurationError("policy and target have different store counts");
  for (std::size_t i = 0; i < policy.size(); ++i) nn::copy_values(policy[i], target[i]);
}

Learner::Learner(QNetwork n, StoreSet params, const TrainConfig& cfg)
    : net(std::move(n)), policy(std::move(params)), target(policy) {
  if (static_cast<int>(policy.size()) != net.store_count())
    throw ConfigurationError("parameter set does not fit model " + std::string(to_string(net.kind())));
  for (std::size_t i = 0; i < policy.size(); ++i) optimizers.emplace_back(nn::AdamOptions{.lr = cfg.lr});
}

std::optional<double> train_step(Learner& L, const ReplayPool& pool, const TrainConfig& cfg, Rng& rng) {
  const auto B = static_cast<std::size_t>(cfg.batch_size);
  if (pool.size() < B) return std::nullopt;
  const auto idx = pool.sample_indices(B, rng);
  const Index dim = pool[idx[0]].features.size();
  const int n = L.net.config().n_slots;

  MatrixXd x(dim, static_cast<Index>(B)), nx(dim, static_cast<Index>(B));
  std::vector<Index> actions(B);
  for (std::size_t b = 0; b < B; ++b) {
    const Transition& t = pool[idx[b]];
    x.col(static_cast<Index>(b)) = t.features;
    nx.col(static_cast<Index>(b)) = t.next_features;
    actions[b] = t.action;
  }
  const NodeInputs next_in = dip::FeatureExtractor::split(nx, n);
  const MatrixXd next_target = L.net.q_batch(L.target, next_in);
  MatrixXd next_policy;
  if (cfg.double_dqn) next_policy = L.net.q_batch(L.policy, next_in);

  MatrixXd y(1, static_cast<Index>(B));
  for (std::size_t b = 0; b < B; ++b) {
    const Transition& t = pool[idx[b]];
    const auto c = static_cast<Index>(b);
    if (t.terminal || !cfg.double_dqn) {
      y(0, c) = td_target(t.reward, next_target.col(c), t.next_mask, t.terminal, cfg.gamma);
    } else {
      const Index a = masked_argmax(next_policy.col(c), t.next_mask);
      y(0, c) = t.reward + cfg.gamma * next_target(a, c);
    }
  }

  Tape tape;
  Var q = L.net.forward(tape, L.policy, dip::FeatureExtractor::split(x, n));
  Var loss = nn::mse(tape, nn::pick<Scalar>(tape, q, actions), y);
  const double value = tape.value(loss)(0, 0);
  tape.backward(loss);
  for (std::size_t s = 0; s < L.policy.size(); ++s) L.optimizers[s].step(L.policy[s]);
  if (++L.gradient_steps % cfg.target_sync_period == 0) sync_target(L.policy, L.target);
  return value;
}

Index greedy_action(const QNetwork& net, StoreSet& stores, const NodeInputs& x, const ActionMask& mask) {
  return masked_argmax(net.q_batch(stores, x).col(0), mask);
}

Index random_action(const ActionMask& mask, Rng& rng) {
  const auto allowed = mask.count();
  if (allowed == 0) throw ContractViolation("every action is masked");
  auto k = std::uniform_int_distribution<Index>(0, allowed - 1)(rng);
  for (Index a = 0; a < mask.size(); ++a)
    if (mask(a) && k-- == 0) return a;
  return -1;
}

Index epsilon_greedy_action(const QNetwork& net, StoreSet& stores, const NodeInputs& x, const ActionMask& mask,
                            double epsilon, Rng& rng) {
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) return random_action(mask, rng);
  return greedy_action(net, stores, x, mask);
}

EvalResult evaluate(const QNetwork& net, StoreSet& stores, DialogueEnv& env, int dialogues, Rng& rng) {
  const dip::FeatureExtractor fx(env.domain());
  EvalResult r;
  for (int i = 0; i < dialogues; ++i) {
    env.reset(rng);
    while (!env.done()) env.step(greedy_action(net, stores, fx.node_inputs(env.belief()), env.mask()), rng);
    r.success_rate += env.result().success;
    r.avg_reward += env.result().reward;
  }
  r.success_rate /= dialogues;
  r.avg_reward /= dialogues;
  return r;
}

EvalResult evaluate_random(DialogueEnv& env, int dialogues, Rng& rng) {
  EvalResult r;
  for (int i = 0; i < dialogues; ++i) {
    env.reset(rng);
    while (!env.done()) env.step(random_action(env.mask(), rng), rng);
    r.success_rate += env.result().success;
    r.avg_reward += env.result().reward;
  }
  r.success_rate /= dialogues;
  r.avg_reward /= dialogues;
  return r;
}

GnnConfig gnn_config_for(const Domain& d, GnnConfig base) {
  base.n_slots = d.informable_count();
  base.dims.s_input = dip::kSlotDim;
  base.dims.i_input = dip::kGlobalDim;
  base.dims.s_actions = kSlotActionCount;
  base.dims.i_actions = kGlobalActionCount;
  return base;
}

namespace {

// Independent streams per purpose so that, e.g., evaluation never shifts the training draws.
Rng stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

enum Stream : std::uint64_t { kInit = 1, kActing = 2, kReplay = 3, kEval = 4 };

}  // namespace

TrainingRun run_training(const Domain& domain, const TaskConfig& task, ModelKind model, const TrainConfig& cfg,
                         std::uint64_t seed, const StoreSet* init, const GnnConfig& base,
                         const CheckpointCallback& on_checkpoint, const MlpConfig& mlp) {
  cfg.validate();
  QNetwork net(model, gnn_config_for(domain, base), mlp);
  Rng init_rng = stream(seed, kInit), act_rng = stream(seed, kActing), replay_rng = stream(seed, kReplay);
  StoreSet params = net.make_parameters(init_rng);
  if (init) sync_target(*init, params);  // checks names and shapes
  Learner L(std::move(net), std::move(params), cfg);
  ReplayPool pool(static_cast<std::size_t>(cfg.replay_capacity));
  DialogueEnv env(domain, task);
  DialogueEnv eval_env(domain, task);
  const dip::FeatureExtractor fx(domain);

  TrainingRun run;
  auto eval_point = [&](int seen) {
    // Every evaluation replays the same goals and noise draws.
    Rng eval_rng = stream(seed, kEval);
    const EvalResult e = evaluate(L.net, L.policy, eval_env, cfg.eval_dialogues, eval_rng);
    run.curve.push_back({seen, e.success_rate, e.avg_reward});
  };

  eval_point(0);
  for (int d = 0; d < cfg.train_dialogues; ++d) {
    const double eps = cfg.epsilon(d);
    env.reset(act_rng);
    VectorXd feats = fx.flat(env.belief());
    while (!env.done()) {
      const ActionMask mask = env.mask();
      const Index a = epsilon_greedy_action(L.net, L.policy, dip::FeatureExtractor::split(feats, fx.n_slots()), mask,
                                            eps, act_rng);
      const StepResult s = env.step(a, act_rng);
      VectorXd next = fx.flat(env.belief());
      pool.push({feats, a, s.reward, next, s.done, env.mask()});
      feats = std::move(next);
      train_step(L, pool, cfg, replay_rng);
    }
    const int seen = d + 1;
    if (seen % cfg.eval_every == 0 || seen == cfg.train_dialogues) eval_point(seen);
    if (on_checkpoint && cfg.checkpoint_every > 0 && seen % cfg.checkpoint_every == 0) on_checkpoint(seen, L.policy);
  }
  run.policy = std::move(L.policy);
  return run;
}

}  // namespace agentgraph
