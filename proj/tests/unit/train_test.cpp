#include "agentgraph/errors.hpp"
#include "agentgraph/train/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace agentgraph;

namespace {

const Domain& cr3() { return builtin_domain(DomainId::CR3); }

GnnConfig tiny_dims() {
  GnnConfig base;
  base.dims.s_hidden = 8;
  base.dims.i_hidden = 12;
  base.dims.s_comm = 6;
  base.dims.i_comm = 8;
  return base;
}

TrainConfig tiny_train() {
  TrainConfig c;
  c.batch_size = 8;
  c.replay_capacity = 200;
  c.target_sync_period = 20;
  c.train_dialogues = 30;
  c.eval_every = 10;
  c.eval_dialogues = 10;
  return c;
}

// Transitions from random play on CR3.
ReplayPool random_pool(std::size_t n, Rng& rng) {
  ReplayPool pool(n);
  DialogueEnv env(cr3(), make_task(3));
  const dip::FeatureExtractor fx(cr3());
  while (pool.size() < n) {
    env.reset(rng);
    while (!env.done() && pool.size() < n) {
      const VectorXd f = fx.flat(env.belief());
      const Index a = random_action(env.mask(), rng);
      const auto s = env.step(a, rng);
      pool.push({f, a, s.reward, fx.flat(env.belief()), s.done, env.mask()});
    }
  }
  return pool;
}

}  // namespace

TEST(TdTarget, Examples) {
  const VectorXd two = VectorXd::Constant(1, 2.0);
  EXPECT_DOUBLE_EQ(td_target(-1.0, two, ActionMask::Constant(1, true), false, 0.9), 0.8);
  EXPECT_EQ(td_target(14.0, two, ActionMask::Constant(1, true), true, 0.9), 14.0);
  EXPECT_EQ(td_target(0.0, (VectorXd(2) << 5, 9).finished(), (ActionMask(2) << true, false).finished(), false, 1.0),
            5.0);
}

TEST(ReplayPoolTest, RingBufferKeepsNewest) {
  ReplayPool pool(3);
  for (int i = 0; i < 5; ++i) pool.push({VectorXd(), i, double(i), VectorXd(), false, ActionMask()});
  ASSERT_EQ(pool.size(), 3u);
  std::vector<Index> kept;
  for (std::size_t i = 0; i < 3; ++i) kept.push_back(pool[i].action);
  std::sort(kept.begin(), kept.end());
  EXPECT_EQ(kept, (std::vector<Index>{2, 3, 4}));
  EXPECT_THROW(pool.push({VectorXd(), 0, NAN, VectorXd(), false, ActionMask()}), TrainingError);
}

// Chi-square goodness of fit over a 1000-item pool; 1105.9 is the 0.99 quantile for 999 dof.
TEST(ReplayPoolTest, SamplingIsUniform) {
  ReplayPool pool(1000);
  for (int i = 0; i < 1000; ++i) pool.push({VectorXd(), i, 0.0, VectorXd(), false, ActionMask()});
  Rng rng(42);
  std::vector<double> counts(1000, 0.0);
  const int draws = 200000;
  for (int k = 0; k < draws / 100; ++k)
    for (std::size_t i : pool.sample_indices(100, rng)) counts[static_cast<std::size_t>(pool[i].action)] += 1;
  const double expected = draws / 1000.0;
  double chi2 = 0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 1105.9);
}

TEST(TrainStep, UnderfullPoolIsANoOp) {
  Rng rng(1);
  QNetwork net(ModelKind::FmDgnn, gnn_config_for(cr3(), tiny_dims()));
  Learner L(net, net.make_parameters(rng), tiny_train());
  const auto before = nn::fingerprint(L.policy[0]);
  ReplayPool pool = random_pool(4, rng);
  EXPECT_FALSE(train_step(L, pool, tiny_train(), rng).has_value());
  EXPECT_EQ(nn::fingerprint(L.policy[0]), before);
  EXPECT_EQ(L.gradient_steps, 0);
}

// Batched and single-column products differ in the last bits, so "zero" is rounding-level here.
TEST(TrainStep, ExactTargetsGiveZeroLossAndNoUpdate) {
  Rng rng(2);
  QNetwork net(ModelKind::FmGnn, gnn_config_for(cr3(), tiny_dims()));
  Learner L(net, net.make_parameters(rng), tiny_train());
  ReplayPool src = random_pool(16, rng);
  ReplayPool pool(16);
  for (std::size_t i = 0; i < src.size(); ++i) {
    Transition t = src[i];
    t.terminal = true;
    t.reward = L.net.q_batch(L.policy, dip::FeatureExtractor::split(t.features, 3))(t.action, 0);
    pool.push(t);
  }
  const StoreSet before = L.policy;
  auto cfg = tiny_train();
  const auto loss = train_step(L, pool, cfg, rng);
  ASSERT_TRUE(loss.has_value());
  EXPECT_LT(*loss, 1e-24);
  for (const auto& [name, block] : before[0])
    EXPECT_LT((L.policy[0].at(name).value - block.value).cwiseAbs().maxCoeff(), 1e-9) << name;
}

TEST(TrainStep, RepeatedTransitionConvergesToItsTarget) {
  Rng rng(3);
  QNetwork net(ModelKind::FmDgnn, gnn_config_for(cr3(), tiny_dims()));
  auto cfg = tiny_train();
  Learner L(net, net.make_parameters(rng), cfg);
  ReplayPool src = random_pool(1, rng);
  Transition t = src[0];
  t.terminal = true;
  t.reward = 7.5;
  ReplayPool pool(8);
  for (int i = 0; i < 8; ++i) pool.push(t);
  for (int i = 0; i < 2000; ++i) train_step(L, pool, cfg, rng);
  const double q = L.net.q_batch(L.policy, dip::FeatureExtractor::split(t.features, 3))(t.action, 0);
  EXPECT_NEAR(q, 7.5, 1e-2);
}

// The loss only looks at taken actions: moving the output bias of another action changes nothing.
TEST(TrainStep, LossIgnoresActionsNotTaken) {
  Rng rng(4);
  QNetwork net(ModelKind::DqnMlp, gnn_config_for(cr3(), tiny_dims()), MlpConfig{16, 8});
  auto cfg = tiny_train();
  ReplayPool pool(8);
  ReplayPool src = random_pool(1, rng);
  for (int i = 0; i < 8; ++i) pool.push(src[0]);
  const Index other = (src[0].action + 1) % net.action_count();
  const StoreSet params = net.make_parameters(rng);
  auto loss_with = [&](double shift) {
    StoreSet p = params;
    p[0].at("mlp/flat/layer/2/b").value(other, 0) += shift;
    Learner L(net, p, cfg);
    Rng r(99);
    return *train_step(L, pool, cfg, r);
  };
  EXPECT_EQ(loss_with(0.0), loss_with(3.0));
}

TEST(SyncTarget, CopiesAndFreezes) {
  Rng rng(5);
  QNetwork net(ModelKind::MmDgnn, gnn_config_for(cr3(), tiny_dims()));
  auto cfg = tiny_train();
  cfg.target_sync_period = 1000;
  Learner L(net, net.make_parameters(rng), cfg);
  ReplayPool pool = random_pool(64, rng);
  const auto x = dip::FeatureExtractor::split(pool[0].features, 3);
  for (int i = 0; i < 5; ++i) train_step(L, pool, cfg, rng);
  EXPECT_NE(L.net.q_batch(L.policy, x), L.net.q_batch(L.target, x));
  const MatrixXd frozen = L.net.q_batch(L.target, x);
  for (int i = 0; i < 5; ++i) train_step(L, pool, cfg, rng);
  EXPECT_EQ(L.net.q_batch(L.target, x), frozen);
  sync_target(L.policy, L.target);
  EXPECT_EQ(L.net.q_batch(L.policy, x), L.net.q_batch(L.target, x));
  const auto fp = nn::fingerprint(L.target[1]);
  sync_target(L.policy, L.target);
  EXPECT_EQ(nn::fingerprint(L.target[1]), fp);

  StoreSet wrong = L.target;
  wrong[0].add("extra/I/input/0/w", 1, 1);
  EXPECT_THROW(sync_target(wrong, L.target), ConfigurationError);
  EXPECT_THROW(sync_target(StoreSet(1), L.target), ConfigurationError);
}

TEST(Acting, FullExplorationMatchesRandomPolicy) {
  QNetwork net(ModelKind::FmDgnn, gnn_config_for(cr3(), tiny_dims()));
  Rng rng(6);
  StoreSet params = net.make_parameters(rng);
  DialogueEnv env(cr3(), make_task(1));
  const dip::FeatureExtractor fx(cr3());
  const int N = 3000;
  double eps_success = 0;
  for (int i = 0; i < N; ++i) {
    env.reset(rng);
    while (!env.done()) env.step(epsilon_greedy_action(net, params, fx.node_inputs(env.belief()), env.mask(), 1.0, rng), rng);
    eps_success += env.result().success;
  }
  Rng rng2(7);
  const double random_success = evaluate_random(env, N, rng2).success_rate;
  const double p = eps_success / N;
  const double sigma = std::sqrt(2 * p * (1 - p) / N);
  EXPECT_LT(std::abs(p - random_success), 4 * sigma);
}

TEST(Evaluate, NeverTouchesParameters) {
  QNetwork net(ModelKind::FxDgnn, gnn_config_for(cr3(), tiny_dims()));
  Rng rng(8);
  StoreSet params = net.make_parameters(rng);
  const auto a = nn::fingerprint(params[0]), b = nn::fingerprint(params[1]);
  DialogueEnv env(cr3(), make_task(3));
  evaluate(net, params, env, 20, rng);
  EXPECT_EQ(nn::fingerprint(params[0]), a);
  EXPECT_EQ(nn::fingerprint(params[1]), b);
}

TEST(Epsilon, LinearAnnealThenFlat) {
  TrainConfig c;
  c.train_dialogues = 1000;
  EXPECT_DOUBLE_EQ(c.epsilon(0), 0.95);
  EXPECT_DOUBLE_EQ(c.epsilon(400), 0.5);
  EXPECT_DOUBLE_EQ(c.epsilon(800), 0.05);
  EXPECT_DOUBLE_EQ(c.epsilon(999), 0.05);
}

TEST(TrainConfigJson, OverridesAndRejectsUnknownKeys) {
  TrainConfig c;
  from_json(nlohmann::json{{"lr", 5e-4}, {"batch_size", 32}}, c);
  EXPECT_EQ(c.lr, 5e-4);
  EXPECT_EQ(c.batch_size, 32);
  EXPECT_EQ(c.gamma, 0.99);
  EXPECT_THROW(from_json(nlohmann::json{{"learning_rate", 1.0}}, c), ConfigurationError);
  TrainConfig bad;
  bad.gamma = 0.0;
  EXPECT_THROW(bad.validate(), ConfigurationError);
}

TEST(RunTraining, SeededRunsAreIdentical) {
  const auto task = make_task(3);
  const auto a = run_training(cr3(), task, ModelKind::FmDgnn, tiny_train(), 11, nullptr, tiny_dims());
  const auto b = run_training(cr3(), task, ModelKind::FmDgnn, tiny_train(), 11, nullptr, tiny_dims());
  ASSERT_EQ(a.curve.size(), 4u);
  EXPECT_EQ(a.curve.front().dialogues, 0);
  EXPECT_EQ(a.curve.back().dialogues, 30);
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].success_rate, b.curve[i].success_rate);
    EXPECT_EQ(a.curve[i].avg_reward, b.curve[i].avg_reward);
  }
  for (std::size_t s = 0; s < a.policy.size(); ++s) EXPECT_EQ(nn::fingerprint(a.policy[s]), nn::fingerprint(b.policy[s]));
}
