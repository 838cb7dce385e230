#pragma once

#include "agentgraph/env/belief.hpp"
#include "agentgraph/env/task.hpp"
#include "agentgraph/env/user_simulator.hpp"
#include "agentgraph/policy/q_network.hpp"

#include <optional>
#include <vector>

namespace agentgraph {

/// Global action index layout: 0..4 are I-agent actions (offer, inform-requested,
/// inform-alternatives, bye, reqmore); then three per slot (request, confirm, select).
struct SystemAction {
  SystemActKind kind;
  int slot_position = -1;  // informable slot index for slot actions
};

SystemAction decode_action(Index global, int n_slots);
Index encode_action(const SystemAction& a, int n_slots);
inline int action_count(int n_slots) { return kGlobalActionCount + kSlotActionCount * n_slots; }

inline constexpr double kSuccessReward = 20.0;
inline constexpr double kTurnPenalty = 1.0;

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

struct EpisodeResult {
  bool success = false;
  int turns = 0;
  double reward = 0.0;
};

/// Mask for a belief state: with masks on, confirm/select of slot k need some mass off
/// "none"; offer needs a known value somewhere; inform-requested needs an offer and a pending
/// request; inform-alternatives needs an offer. Without masks everything is allowed.
ActionMask action_mask(const BeliefState& b, const TaskConfig& cfg);

/// One dialogue episode at a time over a fixed domain and task.
class DialogueEnv {
 public:
  DialogueEnv(const Domain& domain, TaskConfig cfg);

  const Domain& domain() const { return *domain_; }
  const TaskConfig& task() const { return cfg_; }
  int n_slots() const { return domain_->informable_count(); }
  int action_count() const { return agentgraph::action_count(n_slots()); }

  /// Samples a fresh goal and returns the initial belief (all mass on "none").
  const BeliefState& reset(Rng& rng);
  /// Same, with a caller-chosen goal.
  const BeliefState& reset(UserGoal goal);

  StepResult step(Index action, Rng& rng);

  const BeliefState& belief() const { return belief_; }
  ActionMask mask() const { return action_mask(belief_, cfg_); }
  bool done() const { return done_; }
  const UserSimulator& user() const;
  EpisodeResult result() const { return result_; }
  /// Acts the user produced last turn, before and after the error channel.
  const std::vector<DialogueAct>& last_user_acts() const { return user_acts_; }
  const std::vector<DialogueAct>& last_observed_acts() const { return observed_acts_; }

 private:
  SystemTurn realize(const SystemAction& a, Rng& rng);

  const Domain* domain_;
  TaskConfig cfg_;
  std::optional<UserSimulator> user_;
  BeliefState belief_;
  bool done_ = true;
  EpisodeResult result_;
  std::vector<DialogueAct> user_acts_, observed_acts_;
};

/// Hand-written policy: request every unknown slot, offer, answer requests, say goodbye.
Index scripted_policy(const BeliefState& b, const ActionMask& mask);

}  // namespace agentgraph
