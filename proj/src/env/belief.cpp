#include "agentgraph/env/belief.hpp"

#include "agentgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace agentgraph {

BeliefState BeliefState::initial(const Domain& d) {
  BeliefState b;
  for (int k = 0; k < d.informable_count(); ++k) {
    VectorXd p = VectorXd::Zero(static_cast<Index>(d.informable(k).values.size()) + 2);
    p(none_index(p)) = 1.0;
    b.slots.push_back(std::move(p));
  }
  refresh_context(b, d);
  return b;
}

int BeliefState::top_value(int k) const {
  const VectorXd& p = slots[static_cast<std::size_t>(k)];
  Index best = 0;
  for (Index i = 1; i < p.size(); ++i)
    if (p(i) > p(best)) best = i;
  if (best == none_index(p)) return kNoValue;
  if (best == dontcare_index(p)) return kDontCare;
  return static_cast<int>(best);
}

std::vector<int> BeliefState::search_constraints() const {
  std::vector<int> c(slots.size());
  for (std::size_t k = 0; k < slots.size(); ++k) c[k] = std::max(top_value(static_cast<int>(k)), -1);
  return c;
}

void check_normalized(const BeliefState& b) {
  for (std::size_t k = 0; k < b.slots.size(); ++k) {
    const double s = b.slots[k].sum();
    if (!(std::abs(s - 1.0) <= kNormalizationTolerance) || (b.slots[k].array() < 0.0).any())
      throw ContractViolation("belief of slot " + std::to_string(k) + " is not a distribution (sum " +
                              std::to_string(s) + ")");
  }
}

void refresh_context(BeliefState& b, const Domain& d) {
  const auto c = b.search_constraints();
  b.context.db_matches = static_cast<int>(d.matching(c).size());
  b.context.known_slots = 0;
  for (std::size_t k = 0; k < b.slots.size(); ++k)
    if (b.top_value(static_cast<int>(k)) != kNoValue) ++b.context.known_slots;
}

void track(BeliefState& b, const DialogueAct& act, const Domain& d) {
  auto& ctx = b.context;
  ctx.last_user_act = act.type;
  const double c = std::clamp(act.confidence, 0.0, 1.0);
  switch (act.type) {
    case ActType::Inform: {
      const int k = d.informable_position(act.slot);
      if (k < 0) break;
      VectorXd& p = b.slots[static_cast<std::size_t>(k)];
      const Index v = act.value == kDontCare ? BeliefState::dontcare_index(p) : act.value;
      if (v < 0 || v >= BeliefState::none_index(p)) throw ContractViolation("inform carries an out-of-range value");
      p *= (1.0 - c);
      p(v) += c;
      ctx.method = act.value == kDontCare ? SearchMethod::DontCare : SearchMethod::ByConstraints;
      break;
    }
    case ActType::Request:
      if (act.slot >= 0 && std::find(ctx.requested.begin(), ctx.requested.end(), act.slot) == ctx.requested.end())
        ctx.requested.push_back(act.slot);
      ctx.method = SearchMethod::Requests;
      break;
    case ActType::Reqmore: ctx.method = SearchMethod::ByAlternatives; break;
    case ActType::Bye: ctx.method = SearchMethod::Finished; break;
    default: break;
  }
  refresh_context(b, d);
}

}  // namespace agentgraph
