#pragma once

#include "agentgraph/errors.hpp"
#include "agentgraph/nn/parameter_store.hpp"
#include "agentgraph/nn/tensor.hpp"

#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace agentgraph::nn {

/// Handle to a value recorded on a Tape. Only meaningful for the tape that issued it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode automatic differentiation over dense matrices.
///
/// Every op appends a node holding its forward value and a closure that pushes the
/// incoming gradient to its parents. `backward` walks the nodes in reverse, adds the
/// gradients of parameter leaves into their ParameterBlock::gradient and clears the tape.
/// A tape built with `record = false` keeps only forward values (inference mode).
template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Block = ParameterBlock<Scalar>;
  using Backprop = std::function<void(Tape&, const Mat&)>;

  explicit Tape(bool record = true) : record_(record) { nodes_.reserve(256); }

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Mat value) {
    nodes_.push_back(Node{std::move(value), Mat(), nullptr, nullptr, nullptr, false});
    return last();
  }

  /// Leaf for a trainable block. Repeated calls with the same block return the same Var,
  /// so every use of a shared block feeds one gradient accumulator.
  Var parameter(Block& block) {
    auto it = param_index_.find(&block);
    if (it != param_index_.end()) return Var{it->second};
    nodes_.push_back(Node{Mat(), Mat(), nullptr, &block, record_ ? &block : nullptr, record_});
    param_index_.emplace(&block, static_cast<int>(nodes_.size()) - 1);
    return last();
  }

  /// Appends an op result. `parents_need_grad` says whether any input carries a gradient path.
  Var record(Mat value, bool parents_need_grad, Backprop backprop) {
    const bool needs = record_ && parents_need_grad;
    nodes_.push_back(Node{std::move(value), Mat(), needs ? std::move(backprop) : Backprop(), nullptr, nullptr, needs});
    return last();
  }

  const Mat& value(Var v) const {
    const Node& n = node(v);
    return n.source != nullptr ? n.source->value : n.value;
  }
  bool needs_grad(Var v) const { return node(v).needs_grad; }

  template <typename Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = node(v);
    if (!n.needs_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  /// Back-propagates from a 1x1 loss. Parameter gradients are accumulated (not overwritten).
  void backward(Var loss) {
    if (!record_) throw UsageError("backward called on an inference-only tape");
    if (nodes_.empty() || !loss.valid()) throw UsageError("backward called without a recorded forward pass");
    if (loss.id >= static_cast<int>(nodes_.size())) throw UsageError("backward called with a stale Var");
    const Mat& l = value(loss);
    if (l.rows() != 1 || l.cols() != 1) throw UsageError("backward needs a scalar (1x1) loss");

    nodes_[static_cast<std::size_t>(loss.id)].grad = Mat::Ones(1, 1);
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.grad.size() == 0) continue;
      if (n.param != nullptr) {
        n.param->gradient += n.grad;
      } else if (n.backprop) {
        const Mat g = std::move(n.grad);
        n.backprop(*this, g);
      }
    }
    clear();
  }

  void clear() {
    nodes_.clear();
    param_index_.clear();
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    Backprop backprop;
    const Block* source;  // parameter leaves read the live block value
    Block* param;         // set only when gradients are recorded
    bool needs_grad;
  };

  Var last() const { return Var{static_cast<int>(nodes_.size()) - 1}; }

  Node& node(Var v) {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw UsageError("invalid Var for this tape");
    return nodes_[static_cast<std::size_t>(v.id)];
  }
  const Node& node(Var v) const { return const_cast<Tape*>(this)->node(v); }

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Block*, int> param_index_;
};

}  // namespace agentgraph::nn
