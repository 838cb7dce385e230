#include "agentgraph/env/dialogue_env.hpp"

#include "agentgraph/errors.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace agentgraph {

SystemAction decode_action(Index global, int n_slots) {
  if (global < 0 || global >= action_count(n_slots))
    throw UsageError("action " + std::to_string(global) + " out of range for " + std::to_string(n_slots) + " slots");
  if (global < kGlobalActionCount) return {static_cast<SystemActKind>(global), -1};
  const Index local = global - kGlobalActionCount;
  constexpr SystemActKind slot_kinds[] = {SystemActKind::Request, SystemActKind::Confirm, SystemActKind::Select};
  return {slot_kinds[local % kSlotActionCount], static_cast<int>(local / kSlotActionCount)};
}

Index encode_action(const SystemAction& a, int n_slots) {
  const int k = static_cast<int>(a.kind);
  if (k < kGlobalActionCount) return k;
  if (a.slot_position < 0 || a.slot_position >= n_slots) throw UsageError("slot action without a valid slot");
  return kGlobalActionCount + kSlotActionCount * a.slot_position + (k - kGlobalActionCount);
}

ActionMask action_mask(const BeliefState& b, const TaskConfig& cfg) {
  const int n = static_cast<int>(b.slots.size());
  ActionMask m = ActionMask::Constant(action_count(n), true);
  if (!cfg.masks) return m;
  bool any_known = false;
  for (int k = 0; k < n; ++k) {
    const VectorXd& p = b.slots[static_cast<std::size_t>(k)];
    const bool all_none = p(BeliefState::none_index(p)) >= 1.0;
    const Index base = kGlobalActionCount + kSlotActionCount * k;
    m(base + 1) = m(base + 2) = !all_none;
    any_known |= b.top_value(k) != kNoValue;
  }
  m(static_cast<Index>(SystemActKind::Offer)) = any_known;
  m(static_cast<Index>(SystemActKind::InformRequested)) = b.context.offer_happened && !b.context.requested.empty();
  m(static_cast<Index>(SystemActKind::InformAlternatives)) = b.context.offer_happened;
  return m;
}

namespace {

ActType act_type_of(SystemActKind k) {
  switch (k) {
    case SystemActKind::Offer:
    case SystemActKind::InformAlternatives: return ActType::Offer;
    case SystemActKind::InformRequested: return ActType::Inform;
    case SystemActKind::Bye: return ActType::Bye;
    case SystemActKind::Reqmore: return ActType::Reqmore;
    case SystemActKind::Request: return ActType::Request;
    case SystemActKind::Confirm: return ActType::Confirm;
    case SystemActKind::Select: return ActType::Select;
  }
  return ActType::Null;
}

}  // namespace

DialogueEnv::DialogueEnv(const Domain& domain, TaskConfig cfg) : domain_(&domain), cfg_(cfg) { cfg_.validate(); }

const UserSimulator& DialogueEnv::user() const {
  if (!user_) throw UsageError("no episode has been started");
  return *user_;
}

const BeliefState& DialogueEnv::reset(Rng& rng) { return reset(sample_goal(*domain_, rng)); }

const BeliefState& DialogueEnv::reset(UserGoal goal) {
  user_.emplace(*domain_, std::move(goal), cfg_.user);
  belief_ = BeliefState::initial(*domain_);
  done_ = false;
  result_ = {};
  user_acts_.clear();
  observed_acts_.clear();
  return belief_;
}

SystemTurn DialogueEnv::realize(const SystemAction& a, Rng& rng) {
  SystemTurn t;
  t.kind = a.kind;
  auto& ctx = belief_.context;
  switch (a.kind) {
    case SystemActKind::Offer:
    case SystemActKind::InformAlternatives: {
      auto matches = domain_->matching(belief_.search_constraints());
      if (a.kind == SystemActKind::InformAlternatives && matches.size() > 1)
        std::erase(matches, ctx.offered_entity);
      t.entity = matches.empty() ? -1 : matches[std::uniform_int_distribution<std::size_t>(0, matches.size() - 1)(rng)];
      ctx.offered_entity = t.entity;
      ctx.offer_happened = ctx.offer_happened || t.entity >= 0;
      break;
    }
    case SystemActKind::InformRequested:
      t.entity = ctx.offered_entity;
      t.informed = ctx.requested;
      if (t.entity >= 0) ctx.requested.clear();
      break;
    case SystemActKind::Request:
    case SystemActKind::Confirm:
    case SystemActKind::Select:
      t.slot = domain_->informable_slot(a.slot_position);
      t.value = belief_.top_value(a.slot_position);
      break;
    case SystemActKind::Bye:
    case SystemActKind::Reqmore: break;
  }
  ctx.last_system_act = act_type_of(a.kind);
  return t;
}

StepResult DialogueEnv::step(Index action, Rng& rng) {
  if (done_) throw UsageError("step() called on a finished episode; call reset()");
  const auto mask = this->mask();
  if (action < 0 || action >= mask.size()) throw UsageError("action index out of range");
  if (!mask(action)) throw ContractViolation("action " + std::to_string(action) + " is masked in this state");

  const SystemAction a = decode_action(action, n_slots());
  const SystemTurn turn = realize(a, rng);
  ++belief_.context.turn;
  ++result_.turns;
  StepResult r{-kTurnPenalty, false};

  bool ended = a.kind == SystemActKind::Bye;
  if (!ended) {
    user_acts_ = user_->respond(turn, rng);
    observed_acts_.clear();
    for (const auto& act : user_acts_) {
      observed_acts_.push_back(corrupt(act, cfg_.ser, *domain_, rng));
      track(belief_, observed_acts_.back(), *domain_);
    }
    ended = user_->said_bye();
  }
  if (ended || result_.turns >= cfg_.max_turns) {
    done_ = true;
    result_.success = user_->success();
    if (result_.success) r.reward += kSuccessReward;
  }
  result_.reward += r.reward;
  r.done = done_;
  return r;
}

Index scripted_policy(const BeliefState& b, const ActionMask& mask) {
  const int n = static_cast<int>(b.slots.size());
  auto pick = [&](Index a) { return mask(a) ? a : Index(-1); };
  for (int k = 0; k < n; ++k)
    if (b.top_value(k) == kNoValue) {
      if (Index a = pick(encode_action({SystemActKind::Request, k}, n)); a >= 0) return a;
    }
  if (!b.context.offer_happened || b.context.offered_entity < 0)
    if (Index a = pick(static_cast<Index>(SystemActKind::Offer)); a >= 0) return a;
  if (!b.context.requested.empty())
    if (Index a = pick(static_cast<Index>(SystemActKind::InformRequested)); a >= 0) return a;
  return static_cast<Index>(SystemActKind::Bye);
}

}  // namespace agentgraph
