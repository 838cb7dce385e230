#pragma once

#include "agentgraph/env/belief.hpp"
#include "agentgraph/env/domain.hpp"
#include "agentgraph/policy/gnn.hpp"

#include <span>
#include <vector>

namespace agentgraph::dip {

// Index tables for both vectors are in docs/dip-layout.md. Bump the version on any change.
inline constexpr int kLayoutVersion = 1;
inline constexpr int kSlotDim = 25;
inline constexpr int kGlobalDim = 74;

namespace slot_layout {
inline constexpr int kTop1 = 0, kTop2 = 1, kTop3 = 2, kNone = 3, kTopGap = 4, kEntropy = 5;
inline constexpr int kTop1Bins = 6, kEntropyBins = 11;                // 5 each
inline constexpr int kNameLength = 16, kValueCount = 17, kDbEntropy = 18;
inline constexpr int kValueCountBins = 19;                            // 6
}  // namespace slot_layout

namespace global_layout {
inline constexpr int kLastUserAct = 0;        // 8
inline constexpr int kLastSystemAct = 8;      // 8
inline constexpr int kDbMatches = 16;         // 5: 0, 1, 2-4, 5-9, 10+
inline constexpr int kOfferHappened = 21;     // 1
inline constexpr int kKnownSlots = 22;        // 12: 0..10, 11+
inline constexpr int kTurn = 34;              // 10: 0, 1, 2, 3, 4, 5-6, 7-9, 10-14, 15-19, 20+
inline constexpr int kSearchMethod = 44;      // 6
inline constexpr int kPendingRequests = 50;   // 12: 0..10, 11+
inline constexpr int kReserved = 62;          // 12, always zero
}  // namespace global_layout

/// Static description of one informable slot.
struct SlotMeta {
  int name_length = 0;
  int value_count = 0;       // real values, excluding dontcare
  double db_entropy = 0.0;   // nats
};

SlotMeta slot_meta(const Domain& d, int k);

/// `candidates` holds the belief of every candidate value (values then dontcare), `none`
/// the belief of "none". Throws ContractViolation unless they sum to 1.
VectorXd slot_features(std::span<const double> candidates, double none, const SlotMeta& meta);
/// Same, for a tracker distribution whose last entry is "none".
VectorXd slot_features(const VectorXd& belief, const SlotMeta& meta);

VectorXd global_features(const DialogueContext& ctx);

/// Turns beliefs into network inputs for one domain.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const Domain& d);

  int n_slots() const { return static_cast<int>(meta_.size()); }
  int flat_dim() const { return kGlobalDim + kSlotDim * n_slots(); }

  /// Global vector followed by the slot vectors, one column.
  VectorXd flat(const BeliefState& b) const;
  NodeInputs node_inputs(const BeliefState& b) const;

  /// Splits a (flat_dim x batch) matrix into per-node blocks.
  static NodeInputs split(const MatrixXd& flat, int n_slots);

 private:
  std::vector<SlotMeta> meta_;
};

}  // namespace agentgraph::dip
