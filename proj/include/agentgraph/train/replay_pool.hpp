#pragma once

#include "agentgraph/nn/tensor.hpp"
#include "agentgraph/policy/q_network.hpp"

#include <vector>

namespace agentgraph {

/// One experience tuple. Features are the flat DIP vector (global block, then slot blocks).
struct Transition {
  VectorXd features;
  Index action = 0;
  double reward = 0.0;
  VectorXd next_features;
  bool terminal = false;
  ActionMask next_mask;
};

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
class ReplayPool {
 public:
  explicit ReplayPool(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace agentgraph
