#pragma once

#include "agentgraph/env/acts.hpp"
#include "agentgraph/env/domain.hpp"
#include "agentgraph/env/task.hpp"
#include "agentgraph/nn/tensor.hpp"

#include <vector>

namespace agentgraph {

struct UserGoal {
  std::vector<int> constraints;  // per informable slot: value index, or -1 if the user has no preference
  std::vector<int> requests;     // Domain::slots indices the user wants to know
  int source_entity = -1;        // entity the constraints were read off

  int constraint_count() const;
  bool satisfied_by(const Domain& d, int entity) const;
};

/// Constraints: a uniformly chosen subset of 1..min(n, 4) informable slots with values read
/// off a random entity. Requests: one or two requestable-only slots.
UserGoal sample_goal(const Domain& d, Rng& rng);

/// What the system did this turn, as seen by the user.
enum class SystemActKind { Offer, InformRequested, InformAlternatives, Bye, Reqmore, Request, Confirm, Select };
inline constexpr int kGlobalActionCount = 5;
inline constexpr int kSlotActionCount = 3;

struct SystemTurn {
  SystemActKind kind = SystemActKind::Reqmore;
  int slot = -1;                   // Domain::slots index for slot actions
  int value = kNoValue;            // value confirmed / first value offered by select
  int entity = -1;                 // offered entity (-1: nothing matched)
  std::vector<int> informed;       // slots answered by inform-requested
};

/// Agenda-based simulated user. Holds the goal and what has happened so far.
class UserSimulator {
 public:
  static constexpr double kStandardExtraInform = 0.4;

  UserSimulator(const Domain& d, UserGoal goal, UserKind kind);

  const UserGoal& goal() const { return goal_; }
  UserKind kind() const { return kind_; }

  /// Responds to one system turn with one or more acts (never empty). Acts carry confidence 1.
  std::vector<DialogueAct> respond(const SystemTurn& sys, Rng& rng);

  bool said_bye() const { return bye_; }
  int offered_entity() const { return offered_; }
  /// Goal satisfied: the current offer matches every constraint and every request was answered for it.
  bool success() const;
  std::vector<int> outstanding_requests() const;

 private:
  DialogueAct inform_goal(int slot);
  void answer_offer(int entity, std::vector<DialogueAct>& out, Rng& rng);
  void volunteer(std::vector<DialogueAct>& out, Rng& rng, bool only_unstated);

  const Domain* domain_;
  UserGoal goal_;
  UserKind kind_;
  std::vector<bool> stated_;    // per informable slot
  std::vector<bool> answered_;  // per goal request, for the current offer
  int offered_ = -1;
  bool bye_ = false;
};

/// Semantic error channel. With probability 1-ser the act passes unchanged with confidence
/// U[0.8, 1]; otherwise its value is replaced by a different one (2/3) or the whole act becomes
/// null (1/3), with confidence U[0.3, 0.7]. Acts without a value are nulled when corrupted.
DialogueAct corrupt(const DialogueAct& act, double ser, const Domain& d, Rng& rng);

}  // namespace agentgraph
