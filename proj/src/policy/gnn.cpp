#include "agentgraph/policy/gnn.hpp"

#include "agentgraph/errors.hpp"

#include <array>
#include <optional>

namespace agentgraph {

std::string_view to_string(Aggregation a) { return a == Aggregation::Mean ? "mean" : "max"; }

void GnnConfig::validate() const {
  if (n_slots < 1) throw ConfigurationError("GnnConfig.n_slots must be >= 1");
  if (comm_steps < 0) throw ConfigurationError("GnnConfig.comm_steps must be >= 0");
  const std::array<std::pair<const char*, int>, 8> all{{{"s_input", dims.s_input},
                                                        {"i_input", dims.i_input},
                                                        {"s_hidden", dims.s_hidden},
                                                        {"i_hidden", dims.i_hidden},
                                                        {"s_comm", dims.s_comm},
                                                        {"i_comm", dims.i_comm},
                                                        {"s_actions", dims.s_actions},
                                                        {"i_actions", dims.i_actions}}};
  for (auto [name, v] : all)
    if (v < 1) throw ConfigurationError(std::string("GnnConfig.dims.") + name + " must be >= 1");
}

std::vector<Index> QOutput::make_offsets(int i_actions, int n_slots, int s_actions) {
  std::vector<Index> off;
  off.reserve(static_cast<std::size_t>(n_slots) + 2);
  off.push_back(0);
  off.push_back(i_actions);
  for (int s = 0; s < n_slots; ++s) off.push_back(off.back() + s_actions);
  return off;
}

Index QOutput::global_index(int agent, int local) const {
  if (agent < 0 || agent >= agent_count()) throw UsageError("agent index out of range");
  const Index idx = offsets[static_cast<std::size_t>(agent)] + local;
  if (local < 0 || idx >= offsets[static_cast<std::size_t>(agent) + 1]) throw UsageError("local action out of range");
  return idx;
}

std::pair<int, int> QOutput::locate(Index global) const {
  if (global < 0 || global >= offsets.back()) throw UsageError("global action index out of range");
  for (int a = 0; a < agent_count(); ++a)
    if (global < offsets[static_cast<std::size_t>(a) + 1])
      return {a, static_cast<int>(global - offsets[static_cast<std::size_t>(a)])};
  return {-1, -1};
}

namespace {

constexpr int kTypeI = 0;
constexpr int kTypeS = 1;

int type_index(NodeType t) { return t == NodeType::SlotIndependent ? kTypeI : kTypeS; }
const char* type_name(int t) { return t == kTypeI ? "I" : "S"; }

struct LayerDims {
  std::array<int, 2> input;   // feature width
  std::array<int, 2> hidden;  // h^0
  std::array<int, 2> comm;    // h^l, l >= 1
  std::array<int, 2> out;

  int state(int type, int layer) const { return layer == 0 ? hidden[type] : comm[type]; }
};

LayerDims layer_dims(const GnnConfig& cfg, StreamOutputs outs) {
  return {{cfg.dims.i_input, cfg.dims.s_input},
          {cfg.dims.i_hidden, cfg.dims.s_hidden},
          {cfg.dims.i_comm, cfg.dims.s_comm},
          {outs.i_out, outs.s_out}};
}

std::string block_name(std::string_view stream, int type, std::string_view module, int layer, char kind) {
  std::string s(stream);
  s += '/';
  s += type_name(type);
  s += '/';
  s += module;
  s += '/';
  s += std::to_string(layer);
  s += '/';
  s += kind;
  return s;
}

std::string message_module(int target_type) { return std::string("msg_to_") + type_name(target_type); }

/// Edge types (as (source type, target type)) present in `g`.
std::array<std::array<bool, 2>, 2> present_edge_types(const GraphSpec& g) {
  std::array<std::array<bool, 2>, 2> present{};
  for (int i = 0; i < g.node_count(); ++i)
    for (int j = 0; j < g.node_count(); ++j)
      if (g.adjacency()(i, j) != 0) present[type_index(g.node_type(i))][type_index(g.node_type(j))] = true;
  return present;
}

void add_affine(ParameterStore& store, const std::string& w, const std::string& b, int out, int in, bool bias,
                Rng& rng) {
  auto& wb = store.get_or_add(w, out, in);
  nn::glorot_uniform(wb.value, rng);
  if (bias) store.get_or_add(b, out, 1).value.setZero();
}

ParameterBlock* bias_or_null(ParameterStore& store, const std::string& name, bool use_bias) {
  return use_bias ? &store.at(name) : nullptr;
}

}  // namespace

void init_gnn_parameters(ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g, std::string_view stream,
                         StreamOutputs outs, Rng& rng) {
  cfg.validate();
  const LayerDims d = layer_dims(cfg, outs);
  const auto present = present_edge_types(g);
  for (int t : {kTypeI, kTypeS}) {
    add_affine(store, block_name(stream, t, "input", 0, 'w'), block_name(stream, t, "input", 0, 'b'), d.hidden[t],
               d.input[t], cfg.use_bias, rng);
  }
  for (int l = 1; l <= cfg.comm_steps; ++l) {
    for (int src : {kTypeI, kTypeS})
      for (int dst : {kTypeI, kTypeS})
        if (present[src][dst])
          nn::glorot_uniform(
              store.get_or_add(block_name(stream, src, message_module(dst), l, 'w'), d.comm[dst], d.state(src, l - 1))
                  .value,
              rng);
    for (int t : {kTypeI, kTypeS})
      add_affine(store, block_name(stream, t, "update", l, 'w'), block_name(stream, t, "update", l, 'b'), d.comm[t],
                 d.state(t, l - 1), cfg.use_bias, rng);
  }
  for (int t : {kTypeI, kTypeS})
    add_affine(store, block_name(stream, t, "output", 0, 'w'), block_name(stream, t, "output", 0, 'b'), d.out[t],
               d.state(t, cfg.comm_steps), cfg.use_bias, rng);
}

std::vector<Var> gnn_node_outputs(Tape& tape, ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g,
                                  std::string_view stream, StreamOutputs outs, std::span<const Var> inputs) {
  const int n = g.node_count();
  if (static_cast<int>(inputs.size()) != n)
    throw ConfigurationError("GNN expects " + std::to_string(n) + " node inputs, got " + std::to_string(inputs.size()));
  const LayerDims d = layer_dims(cfg, outs);
  std::vector<int> types(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    types[static_cast<std::size_t>(i)] = type_index(g.node_type(i));
    const auto rows = tape.value(inputs[static_cast<std::size_t>(i)]).rows();
    if (rows != d.input[types[static_cast<std::size_t>(i)]])
      throw ConfigurationError("node " + std::to_string(i) + " input has " + std::to_string(rows) +
                               " features, config expects " + std::to_string(d.input[types[static_cast<std::size_t>(i)]]));
  }

  // Input module: h^0_i = f_{c_i}(x_i).
  std::vector<Var> h(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int t = types[static_cast<std::size_t>(i)];
    auto& w = store.at(block_name(stream, t, "input", 0, 'w'));
    auto* b = bias_or_null(store, block_name(stream, t, "input", 0, 'b'), cfg.use_bias);
    h[static_cast<std::size_t>(i)] = nn::relu(tape, nn::affine(tape, w, b, inputs[static_cast<std::size_t>(i)]));
  }

  std::vector<std::vector<Neighbor>> incoming(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) incoming[static_cast<std::size_t>(j)] = neighbors_in(g, j);

  for (int l = 1; l <= cfg.comm_steps; ++l) {
    // Sending: one message per (sender, target node type); identical for all same-typed receivers.
    std::vector<std::array<std::optional<Var>, 2>> msg(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      for (const Neighbor& nb : incoming[static_cast<std::size_t>(j)]) {
        const int src_t = types[static_cast<std::size_t>(nb.node)];
        const int dst_t = types[static_cast<std::size_t>(j)];
        auto& slot = msg[static_cast<std::size_t>(nb.node)][dst_t];
        if (slot) continue;
        auto& w = store.at(block_name(stream, src_t, message_module(dst_t), l, 'w'));
        slot = nn::affine<Scalar>(tape, w, nullptr, h[static_cast<std::size_t>(nb.node)]);
      }
    }
    // Aggregating and updating.
    std::vector<Var> next(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const int t = types[static_cast<std::size_t>(j)];
      auto& w = store.at(block_name(stream, t, "update", l, 'w'));
      auto* b = bias_or_null(store, block_name(stream, t, "update", l, 'b'), cfg.use_bias);
      Var pre = nn::affine(tape, w, b, h[static_cast<std::size_t>(j)]);
      const auto& in = incoming[static_cast<std::size_t>(j)];
      if (!in.empty()) {
        std::vector<Var> received;
        received.reserve(in.size());
        for (const Neighbor& nb : in) received.push_back(*msg[static_cast<std::size_t>(nb.node)][t]);
        Var e = cfg.aggregation == Aggregation::Mean ? nn::mean_of<Scalar>(tape, received)
                                                     : nn::max_of<Scalar>(tape, received);
        pre = nn::add(tape, pre, e);
      }
      next[static_cast<std::size_t>(j)] = nn::relu(tape, pre);
    }
    h = std::move(next);
  }

  // Output module: y_i = o_{c_i}(h^L_i).
  std::vector<Var> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int t = types[static_cast<std::size_t>(i)];
    auto& w = store.at(block_name(stream, t, "output", 0, 'w'));
    auto* b = bias_or_null(store, block_name(stream, t, "output", 0, 'b'), cfg.use_bias);
    y[static_cast<std::size_t>(i)] = nn::affine(tape, w, b, h[static_cast<std::size_t>(i)]);
  }
  return y;
}

Var gdo(Tape& tape, Var value, Var advantage) {
  const auto& V = tape.value(value);
  const auto& A = tape.value(advantage);
  if (A.rows() == 0) throw ConfigurationError("GDO: empty advantage vector");
  if (V.rows() != 1 || V.cols() != A.cols()) throw ConfigurationError("GDO: value must be 1 x batch");
  const Index m = A.rows();
  const Index batch = A.cols();
  MatrixXd q(m, batch);
  std::vector<Index> best(static_cast<std::size_t>(batch));
  for (Index c = 0; c < batch; ++c) {
    Index arg = 0;
    for (Index r = 1; r < m; ++r)
      if (A(r, c) > A(arg, c)) arg = r;
    best[static_cast<std::size_t>(c)] = arg;
    const double top = A(arg, c);
    for (Index r = 0; r < m; ++r) q(r, c) = V(0, c) + (A(r, c) - top);
  }
  const bool ng = tape.needs_grad(value) || tape.needs_grad(advantage);
  return tape.record(std::move(q), ng, [value, advantage, best](Tape& t, const MatrixXd& g) {
    const MatrixXd col_sum = g.colwise().sum();
    t.accumulate(value, col_sum);
    if (t.needs_grad(advantage)) {
      MatrixXd ga = g;
      for (Index c = 0; c < ga.cols(); ++c) ga(best[static_cast<std::size_t>(c)], c) -= col_sum(0, c);
      t.accumulate(advantage, ga);
    }
  });
}

QOutput gdo(std::span<const double> values, std::span<const VectorXd> advantages) {
  if (values.size() != advantages.size()) throw ConfigurationError("GDO: one value per agent required");
  QOutput out;
  out.offsets.push_back(0);
  for (const auto& a : advantages) {
    if (a.size() == 0) throw ConfigurationError("GDO: empty advantage vector");
    out.offsets.push_back(out.offsets.back() + a.size());
  }
  out.q.resize(out.offsets.back());
  for (std::size_t i = 0; i < advantages.size(); ++i) {
    const auto& a = advantages[i];
    out.q.segment(out.offsets[i], a.size()) = (values[i] + (a.array() - a.maxCoeff())).matrix();
  }
  return out;
}

namespace {

std::vector<Var> constants(Tape& tape, const NodeInputs& x) {
  std::vector<Var> in;
  in.reserve(x.size());
  for (const auto& m : x) in.push_back(tape.constant(m));
  return in;
}

QOutput to_qoutput(const MatrixXd& q, const GnnConfig& cfg) {
  QOutput out;
  out.q = q.col(0);
  out.offsets = QOutput::make_offsets(cfg.dims.i_actions, cfg.n_slots, cfg.dims.s_actions);
  return out;
}

void check_node_count(const GnnConfig& cfg, const NodeInputs& x) {
  if (static_cast<int>(x.size()) != cfg.n_slots + 1)
    throw ConfigurationError("expected " + std::to_string(cfg.n_slots + 1) + " node inputs, got " +
                             std::to_string(x.size()));
}

}  // namespace

Var gnn_forward(Tape& tape, ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g, const NodeInputs& x) {
  check_node_count(cfg, x);
  const auto in = constants(tape, x);
  const auto y = gnn_node_outputs(tape, store, cfg, g, kGnnStream, {cfg.dims.i_actions, cfg.dims.s_actions}, in);
  return nn::vstack<Scalar>(tape, y);
}

QOutput gnn_forward(ParameterStore& store, const GnnConfig& cfg, const GraphSpec& g, const NodeInputs& x) {
  Tape tape(false);
  return to_qoutput(tape.value(gnn_forward(tape, store, cfg, g, x)), cfg);
}

Var dgnn_forward(Tape& tape, ParameterStore& value_store, ParameterStore& advantage_store, const GnnConfig& cfg,
                 const NodeInputs& x) {
  check_node_count(cfg, x);
  const GraphSpec value_graph = build_graph(cfg.n_slots, cfg.structure);
  const GraphSpec advantage_graph = build_graph(cfg.n_slots, GraphStructure::FU);
  const auto in = constants(tape, x);
  const auto v = gnn_node_outputs(tape, value_store, cfg, value_graph, kValueStream, {1, 1}, in);
  const auto a = gnn_node_outputs(tape, advantage_store, cfg, advantage_graph, kAdvantageStream,
                                  {cfg.dims.i_actions, cfg.dims.s_actions}, in);
  std::vector<Var> q(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) q[i] = gdo(tape, v[i], a[i]);
  return nn::vstack<Scalar>(tape, q);
}

QOutput dgnn_forward(ParameterStore& value_store, ParameterStore& advantage_store, const GnnConfig& cfg,
                     const NodeInputs& x) {
  Tape tape(false);
  return to_qoutput(tape.value(dgnn_forward(tape, value_store, advantage_store, cfg, x)), cfg);
}

void init_gnn_store(ParameterStore& store, const GnnConfig& cfg, Rng& rng) {
  init_gnn_parameters(store, cfg, build_graph(cfg.n_slots, cfg.structure), kGnnStream,
                      {cfg.dims.i_actions, cfg.dims.s_actions}, rng);
}

void init_dgnn_stores(ParameterStore& value_store, ParameterStore& advantage_store, const GnnConfig& cfg, Rng& rng) {
  init_gnn_parameters(value_store, cfg, build_graph(cfg.n_slots, cfg.structure), kValueStream, {1, 1}, rng);
  init_gnn_parameters(advantage_store, cfg, build_graph(cfg.n_slots, GraphStructure::FU), kAdvantageStream,
                      {cfg.dims.i_actions, cfg.dims.s_actions}, rng);
}

}  // namespace agentgraph
