#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace agentgraph {

struct Slot {
  std::string name;
  bool informable = true;
  bool requestable = true;
  std::vector<std::string> values;  // empty for requestable-only slots
};

/// A database row. `values[k]` is the value index of the k-th informable slot;
/// `info[k]` is the text of the k-th requestable-only slot.
struct Entity {
  std::string name;
  std::vector<int> values;
  std::vector<std::string> info;
};

/// Ontology plus database. Informable slots are the S-nodes, in order.
class Domain {
 public:
  Domain(std::string name, std::vector<Slot> slots, std::vector<Entity> entities);

  const std::string& name() const { return name_; }
  const std::vector<Slot>& slots() const { return slots_; }
  const std::vector<Entity>& entities() const { return entities_; }

  int informable_count() const { return static_cast<int>(informable_.size()); }
  /// Domain::slots index of the k-th informable slot.
  int informable_slot(int k) const { return informable_[static_cast<std::size_t>(k)]; }
  const Slot& informable(int k) const { return slots_[static_cast<std::size_t>(informable_slot(k))]; }
  /// Position among informable slots, or -1.
  int informable_position(int slot) const;
  const std::vector<int>& requestable_only() const { return req_only_; }
  int slot_index(std::string_view name) const;  // -1 if absent

  /// Entities whose k-th informable value equals constraints[k] for every k with
  /// constraints[k] >= 0 (negative entries are unconstrained).
  std::vector<int> matching(const std::vector<int>& constraints) const;

  /// Entropy of the k-th informable slot's value distribution across the database, in nats.
  double value_entropy(int k) const;

 private:
  std::string name_;
  std::vector<Slot> slots_;
  std::vector<Entity> entities_;
  std::vector<int> informable_;
  std::vector<int> req_only_;
};

enum class DomainId { CR3, SFR6, LAP11 };

std::string_view to_string(DomainId d);
DomainId parse_domain(std::string_view name);

/// Built-in synthetic domains: 3, 6 and 11 informable slots with 30, 100 and 150 entities.
/// Generated from a fixed seed, so identical on every platform with the same standard library.
const Domain& builtin_domain(DomainId d);

nlohmann::json domain_to_json(const Domain& d);
/// Errors name the offending field, e.g. "entities[3].values.area: unknown value 'moon'".
Domain domain_from_json(const nlohmann::json& j);
Domain load_domain(const std::string& path);

}  // namespace agentgraph
