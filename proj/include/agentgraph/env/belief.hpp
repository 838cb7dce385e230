#pragma once

#include "agentgraph/env/acts.hpp"
#include "agentgraph/env/domain.hpp"
#include "agentgraph/nn/tensor.hpp"

#include <vector>

namespace agentgraph {

/// How the user is currently driving the search, inferred from their last acts.
enum class SearchMethod { None, ByConstraints, ByAlternatives, DontCare, Requests, Finished };
inline constexpr int kSearchMethodCount = 6;

/// Slot-independent part b0 of the belief.
struct DialogueContext {
  ActType last_user_act = ActType::Null;
  ActType last_system_act = ActType::Null;
  bool offer_happened = false;
  int offered_entity = -1;
  int db_matches = 0;     // entities matching the top value of every slot
  int known_slots = 0;    // slots whose top value is not "none"
  int turn = 0;
  SearchMethod method = SearchMethod::None;
  std::vector<int> requested;  // Domain::slots indices the user asked about, not yet answered
};

/// b = b0 ⊕ b1 ⊕ … ⊕ bn. Each b_k is a distribution over the k-th informable slot's
/// values, then "dontcare", then "none" (last entry).
struct BeliefState {
  DialogueContext context;
  std::vector<VectorXd> slots;

  static BeliefState initial(const Domain& d);

  static Index none_index(const VectorXd& b) { return b.size() - 1; }
  static Index dontcare_index(const VectorXd& b) { return b.size() - 2; }

  /// Most believed entry of slot k as a value index, kDontCare, or kNoValue for "none".
  /// Ties go to the lowest index.
  int top_value(int k) const;
  /// Per informable slot: the top value if it is a real value, else -1.
  std::vector<int> search_constraints() const;
};

inline constexpr double kNormalizationTolerance = 1e-9;

/// Throws ContractViolation if any slot distribution is not normalized.
void check_normalized(const BeliefState& b);

/// Focus-rule update with one observed user act, then refreshes the derived context
/// fields (database matches, known-slot count).
void track(BeliefState& b, const DialogueAct& observed, const Domain& d);

/// Recomputes db_matches and known_slots from the slot beliefs.
void refresh_context(BeliefState& b, const Domain& d);

}  // namespace agentgraph
