#pragma once

#include "agentgraph/policy/gnn.hpp"

#include <Eigen/Core>

#include <string_view>
#include <vector>

namespace agentgraph {

/// The flat baseline and the five graph models of the benchmark grid.
enum class ModelKind { DqnMlp, FmGnn, FmDgnn, UmDgnn, MmDgnn, FxDgnn };

std::string_view to_string(ModelKind m);  // CLI spelling: dqn, fm-gnn, ...
ModelKind parse_model(std::string_view name);
const std::vector<ModelKind>& all_models();

/// Row of the model table: dual stream?, communication, graph structure.
struct ModelTraits {
  bool dual;
  Aggregation aggregation;
  GraphStructure structure;
};
ModelTraits traits_of(ModelKind m);

/// Hidden widths of the flat DQN baseline.
struct MlpConfig {
  int hidden1 = 300;
  int hidden2 = 100;
};

using ActionMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Argmax over entries whose mask is true; ties go to the lowest index.
/// Throws ContractViolation when nothing is selectable.
template <typename Derived>
Index masked_argmax(const Eigen::DenseBase<Derived>& q, const ActionMask& mask) {
  if (mask.size() != q.size()) throw ConfigurationError("mask size does not match Q-vector size");
  Index best = -1;
  for (Index i = 0; i < q.size(); ++i) {
    if (!mask(i)) continue;
    if (best < 0 || q(i) > q(best)) best = i;
  }
  if (best < 0) throw ContractViolation("every action is masked");
  return best;
}

/// Max over unmasked entries (same contract as masked_argmax).
template <typename Derived>
double masked_max(const Eigen::DenseBase<Derived>& q, const ActionMask& mask) {
  return static_cast<double>(q(masked_argmax(q, mask)));
}

/// Parameters of one Q-network: one store, or two (GNN-1, GNN-2) for dual models.
using StoreSet = std::vector<ParameterStore>;

/// Architecture of a Q-network. Holds no parameters; the same object evaluates a policy
/// network and its target network by passing different StoreSets.
class QNetwork {
 public:
  QNetwork(ModelKind kind, GnnConfig cfg, MlpConfig mlp = {});

  ModelKind kind() const { return kind_; }
  const GnnConfig& config() const { return cfg_; }
  const MlpConfig& mlp_config() const { return mlp_; }
  int action_count() const { return cfg_.action_count(); }
  int store_count() const { return traits_.dual ? 2 : 1; }
  bool is_graph_model() const { return kind_ != ModelKind::DqnMlp; }

  StoreSet make_parameters(Rng& rng) const;

  /// (action_count x batch) Q-values.
  Var forward(Tape& tape, StoreSet& stores, const NodeInputs& x) const;
  QOutput q_values(StoreSet& stores, const NodeInputs& x) const;
  MatrixXd q_batch(StoreSet& stores, const NodeInputs& x) const;

 private:
  ModelKind kind_;
  ModelTraits traits_;
  GnnConfig cfg_;
  MlpConfig mlp_;
  GraphSpec graph_;
};

}  // namespace agentgraph
