#include "agentgraph/env/user_simulator.hpp"

#include "agentgraph/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace agentgraph {

int UserGoal::constraint_count() const {
  return static_cast<int>(std::count_if(constraints.begin(), constraints.end(), [](int v) { return v >= 0; }));
}

bool UserGoal::satisfied_by(const Domain& d, int entity) const {
  if (entity < 0 || entity >= static_cast<int>(d.entities().size())) return false;
  const auto& v = d.entities()[static_cast<std::size_t>(entity)].values;
  for (std::size_t k = 0; k < constraints.size(); ++k)
    if (constraints[k] >= 0 && v[k] != constraints[k]) return false;
  return true;
}

UserGoal sample_goal(const Domain& d, Rng& rng) {
  const int n = d.informable_count();
  UserGoal g;
  g.source_entity = std::uniform_int_distribution<int>(0, static_cast<int>(d.entities().size()) - 1)(rng);
  const auto& ent = d.entities()[static_cast<std::size_t>(g.source_entity)];
  const int k = std::uniform_int_distribution<int>(1, std::min(n, 4))(rng);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  g.constraints.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < k; ++i) {
    const auto s = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    g.constraints[s] = ent.values[s];
  }
  std::vector<int> req = d.requestable_only();
  if (!req.empty()) {
    std::shuffle(req.begin(), req.end(), rng);
    const int m = std::uniform_int_distribution<int>(1, std::min<int>(2, static_cast<int>(req.size())))(rng);
    g.requests.assign(req.begin(), req.begin() + m);
    std::sort(g.requests.begin(), g.requests.end());
  }
  return g;
}

UserSimulator::UserSimulator(const Domain& d, UserGoal goal, UserKind kind)
    : domain_(&d), goal_(std::move(goal)), kind_(kind) {
  if (static_cast<int>(goal_.constraints.size()) != d.informable_count())
    throw ConfigurationError("user goal does not match the domain's informable slots");
  stated_.assign(goal_.constraints.size(), false);
  answered_.assign(goal_.requests.size(), false);
}

bool UserSimulator::success() const {
  return goal_.satisfied_by(*domain_, offered_) && std::all_of(answered_.begin(), answered_.end(), [](bool b) { return b; });
}

std::vector<int> UserSimulator::outstanding_requests() const {
  std::vector<int> out;
  for (std::size_t r = 0; r < goal_.requests.size(); ++r)
    if (!answered_[r]) out.push_back(goal_.requests[r]);
  return out;
}

DialogueAct UserSimulator::inform_goal(int slot) {
  const int k = domain_->informable_position(slot);
  const int v = goal_.constraints[static_cast<std::size_t>(k)];
  if (v >= 0) stated_[static_cast<std::size_t>(k)] = true;
  return DialogueAct::inform(slot, v >= 0 ? v : kDontCare);
}

void UserSimulator::answer_offer(int entity, std::vector<DialogueAct>& out, Rng& rng) {
  if (entity >= 0 && goal_.satisfied_by(*domain_, entity)) {
    if (entity != offered_) answered_.assign(goal_.requests.size(), false);
    offered_ = entity;
    const auto pending = outstanding_requests();
    if (pending.empty()) {
      out.push_back(DialogueAct::bye());
    } else {
      for (int r : pending) out.push_back(DialogueAct::request(r));
    }
    return;
  }
  offered_ = entity;
  answered_.assign(goal_.requests.size(), false);
  if (kind_ == UserKind::Unfriendly) return;
  // Correct one violated constraint, or restate one if nothing matched at all.
  std::vector<int> candidates;
  for (int k = 0; k < domain_->informable_count(); ++k) {
    const int want = goal_.constraints[static_cast<std::size_t>(k)];
    if (want < 0) continue;
    if (entity < 0 || domain_->entities()[static_cast<std::size_t>(entity)].values[static_cast<std::size_t>(k)] != want)
      candidates.push_back(k);
  }
  if (candidates.empty()) return;
  const int k = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  out.push_back(inform_goal(domain_->informable_slot(k)));
}

void UserSimulator::volunteer(std::vector<DialogueAct>& out, Rng& rng, bool only_unstated) {
  std::vector<int> candidates;
  for (int k = 0; k < domain_->informable_count(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    if (goal_.constraints[ks] < 0 || (only_unstated && stated_[ks])) continue;
    bool already = false;
    for (const auto& a : out) already |= a.type == ActType::Inform && a.slot == domain_->informable_slot(k);
    if (!already) candidates.push_back(k);
  }
  if (candidates.empty()) return;
  const int k = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  out.push_back(inform_goal(domain_->informable_slot(k)));
}

std::vector<DialogueAct> UserSimulator::respond(const SystemTurn& sys, Rng& rng) {
  if (bye_) throw UsageError("the user already ended the dialogue");
  std::vector<DialogueAct> out;
  const bool standard = kind_ == UserKind::Standard;
  switch (sys.kind) {
    case SystemActKind::Request:
    case SystemActKind::Confirm:
    case SystemActKind::Select:
      // Confirmations are affirmed or corrected the same way: by stating the goal value.
      out.push_back(inform_goal(sys.slot));
      break;
    case SystemActKind::Offer:
    case SystemActKind::InformAlternatives:
      answer_offer(sys.entity, out, rng);
      break;
    case SystemActKind::InformRequested:
      if (offered_ >= 0 && sys.entity == offered_ && goal_.satisfied_by(*domain_, offered_)) {
        for (std::size_t r = 0; r < goal_.requests.size(); ++r)
          if (std::find(sys.informed.begin(), sys.informed.end(), goal_.requests[r]) != sys.informed.end())
            answered_[r] = true;
        const auto pending = outstanding_requests();
        if (pending.empty()) out.push_back(DialogueAct::bye());
        for (int r : pending) out.push_back(DialogueAct::request(r));
        break;
      }
      [[fallthrough]];
    case SystemActKind::Reqmore:
      if (offered_ >= 0 && goal_.satisfied_by(*domain_, offered_)) {
        const auto pending = outstanding_requests();
        if (pending.empty()) out.push_back(DialogueAct::bye());
        for (int r : pending) out.push_back(DialogueAct::request(r));
      } else if (standard) {
        volunteer(out, rng, false);
      }
      break;
    case SystemActKind::Bye:
      out.push_back(DialogueAct::bye());
      break;
  }
  const bool leaving = std::any_of(out.begin(), out.end(), [](const DialogueAct& a) { return a.type == ActType::Bye; });
  if (standard && !leaving && std::bernoulli_distribution(kStandardExtraInform)(rng)) volunteer(out, rng, true);
  if (out.empty()) out.push_back(DialogueAct::null());
  bye_ = leaving;
  return out;
}

DialogueAct corrupt(const DialogueAct& act, double ser, const Domain& d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DialogueAct out = act;
  if (u(rng) >= ser) {
    out.confidence = 0.8 + 0.2 * u(rng);
    return out;
  }
  const bool substitute = u(rng) < 2.0 / 3.0;
  const int k = act.type == ActType::Inform ? d.informable_position(act.slot) : -1;
  if (substitute && k >= 0 && act.has_value()) {
    const int V = static_cast<int>(d.informable(k).values.size());
    if (act.value == kDontCare) {
      out.value = std::uniform_int_distribution<int>(0, V - 1)(rng);
    } else {
      const int r = std::uniform_int_distribution<int>(0, V - 2)(rng);
      out.value = r >= act.value ? r + 1 : r;
    }
  } else {
    out = DialogueAct::null();
  }
  out.confidence = 0.3 + 0.4 * u(rng);
  return out;
}

}  // namespace agentgraph
