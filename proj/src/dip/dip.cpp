#include "agentgraph/dip/dip.hpp"

#include "agentgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace agentgraph::dip {

namespace {

int quintile(double x) { return std::clamp(static_cast<int>(std::floor(x * 5.0)), 0, 4); }

int value_count_bucket(int v) {
  if (v <= 3) return 0;
  if (v <= 5) return 1;
  if (v <= 9) return 2;
  if (v <= 19) return 3;
  if (v <= 49) return 4;
  return 5;
}

int db_bucket(int n) {
  if (n <= 1) return n;
  if (n <= 4) return 2;
  if (n <= 9) return 3;
  return 4;
}

int turn_bucket(int t) {
  if (t <= 4) return t;
  if (t <= 6) return 5;
  if (t <= 9) return 6;
  if (t <= 14) return 7;
  if (t <= 19) return 8;
  return 9;
}

}  // namespace

SlotMeta slot_meta(const Domain& d, int k) {
  return {static_cast<int>(d.informable(k).name.size()), static_cast<int>(d.informable(k).values.size()),
          d.value_entropy(k)};
}

VectorXd slot_features(std::span<const double> candidates, double none, const SlotMeta& meta) {
  using namespace slot_layout;
  if (candidates.size() < 2) throw ConfigurationError("a slot needs at least two candidate values");
  double total = none;
  for (double p : candidates) total += p;
  if (!(std::abs(total - 1.0) <= kNormalizationTolerance))
    throw ContractViolation("slot belief sums to " + std::to_string(total) + ", expected 1");

  std::vector<double> sorted(candidates.begin(), candidates.end());
  std::partial_sort(sorted.begin(), sorted.begin() + std::min<std::ptrdiff_t>(3, std::ssize(sorted)), sorted.end(),
                    std::greater<>());
  sorted.resize(std::max<std::size_t>(sorted.size(), 3), 0.0);

  double h = 0.0;
  auto acc = [&h](double p) {
    if (p > 0) h -= p * std::log(p);
  };
  for (double p : candidates) acc(p);
  acc(none);
  const double entropy = std::min(1.0, h / std::log(static_cast<double>(candidates.size())));

  VectorXd f = VectorXd::Zero(kSlotDim);
  f(kTop1) = sorted[0];
  f(kTop2) = sorted[1];
  f(kTop3) = sorted[2];
  f(kNone) = none;
  f(kTopGap) = sorted[0] - sorted[1];
  f(kEntropy) = entropy;
  f(kTop1Bins + quintile(sorted[0])) = 1.0;
  f(kEntropyBins + quintile(entropy)) = 1.0;

  f(kNameLength) = std::min(1.0, meta.name_length / 20.0);
  f(kValueCount) = std::min(1.0, meta.value_count / 100.0);
  f(kDbEntropy) = meta.value_count > 1 ? std::min(1.0, meta.db_entropy / std::log(double(meta.value_count))) : 0.0;
  f(kValueCountBins + value_count_bucket(meta.value_count)) = 1.0;
  return f;
}

VectorXd slot_features(const VectorXd& belief, const SlotMeta& meta) {
  const Index n = belief.size() - 1;
  return slot_features(std::span<const double>(belief.data(), static_cast<std::size_t>(n)), belief(n), meta);
}

VectorXd global_features(const DialogueContext& ctx) {
  using namespace global_layout;
  VectorXd f = VectorXd::Zero(kGlobalDim);
  f(kLastUserAct + static_cast<int>(ctx.last_user_act)) = 1.0;
  f(kLastSystemAct + static_cast<int>(ctx.last_system_act)) = 1.0;
  f(kDbMatches + db_bucket(std::max(0, ctx.db_matches))) = 1.0;
  f(kOfferHappened) = ctx.offer_happened ? 1.0 : 0.0;
  f(kKnownSlots + std::clamp(ctx.known_slots, 0, 11)) = 1.0;
  f(kTurn + turn_bucket(std::max(0, ctx.turn))) = 1.0;
  f(kSearchMethod + static_cast<int>(ctx.method)) = 1.0;
  f(kPendingRequests + std::min<int>(static_cast<int>(ctx.requested.size()), 11)) = 1.0;
  return f;
}

FeatureExtractor::FeatureExtractor(const Domain& d) {
  for (int k = 0; k < d.informable_count(); ++k) meta_.push_back(slot_meta(d, k));
}

VectorXd FeatureExtractor::flat(const BeliefState& b) const {
  if (static_cast<int>(b.slots.size()) != n_slots()) throw ConfigurationError("belief has the wrong number of slots");
  VectorXd out(flat_dim());
  out.head(kGlobalDim) = global_features(b.context);
  for (int k = 0; k < n_slots(); ++k)
    out.segment(kGlobalDim + kSlotDim * k, kSlotDim) =
        slot_features(b.slots[static_cast<std::size_t>(k)], meta_[static_cast<std::size_t>(k)]);
  return out;
}

NodeInputs FeatureExtractor::node_inputs(const BeliefState& b) const {
  return split(flat(b), n_slots());
}

NodeInputs FeatureExtractor::split(const MatrixXd& flat, int n_slots) {
  if (flat.rows() != kGlobalDim + kSlotDim * n_slots)
    throw ConfigurationError("flat feature matrix has " + std::to_string(flat.rows()) + " rows, expected " +
                             std::to_string(kGlobalDim + kSlotDim * n_slots));
  NodeInputs x;
  x.reserve(static_cast<std::size_t>(n_slots) + 1);
  x.push_back(flat.topRows(kGlobalDim));
  for (int k = 0; k < n_slots; ++k) x.push_back(flat.middleRows(kGlobalDim + kSlotDim * k, kSlotDim));
  return x;
}

}  // namespace agentgraph::dip
