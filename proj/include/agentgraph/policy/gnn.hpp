#pragma once

#include "agentgraph/graph/graph_spec.hpp"
#include "agentgraph/nn.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentgraph {

enum class Aggregation { Mean, Max };

std::string_view to_string(Aggregation a);

/// Layer widths. Defaults are the benchmark settings: DIP inputs 25/74, input module
/// outputs 40/250, communication outputs 20/100, 3 actions per slot, 5 global actions.
struct GnnDims {
  int s_input = 25;
  int i_input = 74;
  int s_hidden = 40;
  int i_hidden = 250;
  int s_comm = 20;
  int i_comm = 100;
  int s_actions = 3;
  int i_actions = 5;

  friend bool operator==(const GnnDims&, const GnnDims&) = default;
};

struct GnnConfig {
  int n_slots = 1;
  GraphStructure structure = GraphStructure::FC;
  int comm_steps = 1;  // L
  Aggregation aggregation = Aggregation::Mean;
  GnnDims dims;
  bool use_bias = true;  // input/update/output layers; messages never carry a bias

  void validate() const;
  int action_count() const { return dims.i_actions + n_slots * dims.s_actions; }
};

/// Concatenated per-agent Q-values q0 ⊕ q1 ⊕ … ⊕ qn plus the agent/action index map.
struct QOutput {
  VectorXd q;
  std::vector<Index> offsets;  // agent a owns [offsets[a], offsets[a+1]); offsets.back() == q.size()

  int agent_count() const { return static_cast<int>(offsets.size()) - 1; }
  Index global_index(int agent, int local) const;
  /// (agent, local action) for a global index.
  std::pair<int, int> locate(Index global) const;

  static std::vector<Index> make_offsets(int i_actions, int n_slots, int s_actions);
};

/// Per-node input batches: entry i is (feature dim x batch) for node i, node 0 the I-node.
using NodeInputs = std::vector<MatrixXd>;

/// Output width per node type for one GNN stream.
struct StreamOutputs {
  int i_out;
  int s_out;
};

/// Creates (Glorot weights, zero biases) every block the stream needs on `g`.
/// Block names follow `{stream}/{I|S}/{module}/{layer}/{w|b}`; message weights use the
/// module name `msg_to_I` / `msg_to_S` under the sending node type. Node-type sharing
/// means no block shape depends on the number of slots.
void init_gnn_parameters(ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g, std::string_view stream,
                         StreamOutputs outs, Rng& rng);

/// Input module, L communication steps (send / aggregate / update) and output module.
/// Returns one (out x batch) Var per node.
std::vector<Var> gnn_node_outputs(Tape& tape, ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g,
                                  std::string_view stream, StreamOutputs outs, std::span<const Var> inputs);

/// Graph Dueling Operation for one agent: Q_j = V + (A_j - max_k A_k), column-wise.
/// `value` is 1 x B, `advantage` is m x B.
Var gdo(Tape& tape, Var value, Var advantage);

/// Plain-value GDO over all agents.
QOutput gdo(std::span<const double> values, std::span<const VectorXd> advantages);

/// Stream names used for the Q-network blocks.
inline constexpr std::string_view kGnnStream = "gnn";
inline constexpr std::string_view kValueStream = "gnn1";
inline constexpr std::string_view kAdvantageStream = "gnn2";

/// Single GNN Q-network: per-agent outputs are the Q-values.
Var gnn_forward(Tape& tape, ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g, const NodeInputs& x);
QOutput gnn_forward(ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g, const NodeInputs& x);

/// Dual GNN: GNN-1 (graph from cfg.structure, one output per agent) gives V_i, GNN-2
/// (always isolated) gives the advantages; combined per agent by GDO.
Var dgnn_forward(Tape& tape, ParameterStore& value_store, ParameterStore& advantage_store, const GnnConfig& cfg,
                 const NodeInputs& x);
QOutput dgnn_forward(ParameterStore& value_store, ParameterStore& advantage_store, const GnnConfig& cfg,
                     const NodeInputs& x);

void init_gnn_store(ParameterStore& store, const GnnConfig& cfg, Rng& rng);
void init_dgnn_stores(ParameterStore& value_store, ParameterStore& advantage_store, const GnnConfig& cfg, Rng& rng);

}  // namespace agentgraph
