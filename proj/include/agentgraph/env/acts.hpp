#pragma once

#include <cstdint>
#include <string_view>

namespace agentgraph {

enum class ActType : std::uint8_t { Inform, Request, Confirm, Select, Bye, Null, Reqmore, Offer };
inline constexpr int kActTypeCount = 8;

std::string_view to_string(ActType a);

/// Value index meaning "the user has no preference" for an informable slot.
inline constexpr int kDontCare = -2;
inline constexpr int kNoValue = -1;

/// One semantic act. `slot` indexes Domain::slots; `value` indexes that slot's values
/// (or kDontCare); `entity` is set on offers (-1: nothing matched).
struct DialogueAct {
  ActType type = ActType::Null;
  int slot = -1;
  int value = kNoValue;
  int entity = -1;
  double confidence = 1.0;

  static DialogueAct null() { return {}; }
  static DialogueAct inform(int slot, int value) { return {ActType::Inform, slot, value, -1, 1.0}; }
  static DialogueAct request(int slot) { return {ActType::Request, slot, kNoValue, -1, 1.0}; }
  static DialogueAct bye() { return {ActType::Bye, -1, kNoValue, -1, 1.0}; }

  bool has_value() const { return value != kNoValue; }
  friend bool operator==(const DialogueAct&, const DialogueAct&) = default;
};

}  // namespace agentgraph
