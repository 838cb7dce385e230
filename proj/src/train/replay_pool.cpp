#include "agentgraph/train/replay_pool.hpp"

#include "agentgraph/errors.hpp"

#include <random>

namespace agentgraph {

ReplayPool::ReplayPool(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigurationError("replay capacity must be >= 1");
  items_.reserve(capacity);
}

void ReplayPool::push(Transition t) {
  if (!std::isfinite(t.reward)) throw TrainingError("non-finite reward pushed to the replay pool");
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayPool::sample_indices(std::size_t batch, Rng& rng) const {
  if (items_.empty()) throw UsageError("sampling from an empty replay pool");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

}  // namespace agentgraph
