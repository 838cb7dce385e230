#include "agentgraph/policy/q_network.hpp"

#include "agentgraph/errors.hpp"

#include <string>

namespace agentgraph {

std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::DqnMlp: return "dqn";
    case ModelKind::FmGnn: return "fm-gnn";
    case ModelKind::FmDgnn: return "fm-dgnn";
    case ModelKind::UmDgnn: return "um-dgnn";
    case ModelKind::MmDgnn: return "mm-dgnn";
    case ModelKind::FxDgnn: return "fx-dgnn";
  }
  return "?";
}

const std::vector<ModelKind>& all_models() {
  static const std::vector<ModelKind> models{ModelKind::DqnMlp, ModelKind::FmGnn,  ModelKind::FmDgnn,
                                             ModelKind::UmDgnn, ModelKind::MmDgnn, ModelKind::FxDgnn};
  return models;
}

ModelKind parse_model(std::string_view name) {
  for (ModelKind m : all_models())
    if (to_string(m) == name) return m;
  throw ConfigurationError("unknown model '" + std::string(name) +
                           "' (valid: dqn, fm-gnn, fm-dgnn, um-dgnn, mm-dgnn, fx-dgnn)");
}

ModelTraits traits_of(ModelKind m) {
  switch (m) {
    case ModelKind::DqnMlp: return {false, Aggregation::Mean, GraphStructure::FU};
    case ModelKind::FmGnn: return {false, Aggregation::Mean, GraphStructure::FC};
    case ModelKind::FmDgnn: return {true, Aggregation::Mean, GraphStructure::FC};
    case ModelKind::UmDgnn: return {true, Aggregation::Mean, GraphStructure::FU};
    case ModelKind::MmDgnn: return {true, Aggregation::Mean, GraphStructure::MN};
    case ModelKind::FxDgnn: return {true, Aggregation::Max, GraphStructure::FC};
  }
  throw ConfigurationError("unknown model kind");
}

namespace {

constexpr std::string_view kMlpStream = "mlp";

int flat_input_width(const GnnConfig& cfg) { return cfg.dims.i_input + cfg.n_slots * cfg.dims.s_input; }

}  // namespace

QNetwork::QNetwork(ModelKind kind, GnnConfig cfg, MlpConfig mlp)
    : kind_(kind), traits_(traits_of(kind)), cfg_(std::move(cfg)), mlp_(mlp), graph_(build_graph(cfg_.n_slots, GraphStructure::FU)) {
  if (is_graph_model()) {
    cfg_.structure = traits_.structure;
    cfg_.aggregation = traits_.aggregation;
  }
  cfg_.validate();
  if (mlp_.hidden1 < 1 || mlp_.hidden2 < 1) throw ConfigurationError("MLP hidden widths must be >= 1");
  graph_ = build_graph(cfg_.n_slots, cfg_.structure);
}

StoreSet QNetwork::make_parameters(Rng& rng) const {
  StoreSet stores(static_cast<std::size_t>(store_count()));
  if (kind_ == ModelKind::DqnMlp) {
    auto& s = stores[0];
    const int widths[] = {flat_input_width(cfg_), mlp_.hidden1, mlp_.hidden2, action_count()};
    for (int l = 0; l < 3; ++l) {
      const std::string base = std::string(kMlpStream) + "/flat/layer/" + std::to_string(l);
      nn::glorot_uniform(s.add(base + "/w", widths[l + 1], widths[l]).value, rng);
      s.add(base + "/b", widths[l + 1], 1);
    }
  } else if (traits_.dual) {
    init_dgnn_stores(stores[0], stores[1], cfg_, rng);
  } else {
    init_gnn_store(stores[0], cfg_, rng);
  }
  return stores;
}

Var QNetwork::forward(Tape& tape, StoreSet& stores, const NodeInputs& x) const {
  if (static_cast<int>(stores.size()) != store_count())
    throw ConfigurationError("model " + std::string(to_string(kind_)) + " needs " + std::to_string(store_count()) +
                             " parameter store(s)");
  if (kind_ == ModelKind::DqnMlp) {
    if (static_cast<int>(x.size()) != cfg_.n_slots + 1)
      throw ConfigurationError("expected " + std::to_string(cfg_.n_slots + 1) + " node inputs");
    Index rows = 0;
    for (const auto& m : x) rows += m.rows();
    MatrixXd flat(rows, x[0].cols());
    Index r = 0;
    for (const auto& m : x) {
      flat.middleRows(r, m.rows()) = m;
      r += m.rows();
    }
    Var h = tape.constant(std::move(flat));
    auto& s = stores[0];
    for (int l = 0; l < 3; ++l) {
      const std::string base = std::string(kMlpStream) + "/flat/layer/" + std::to_string(l);
      h = nn::affine(tape, s.at(base + "/w"), &s.at(base + "/b"), h);
      if (l < 2) h = nn::relu(tape, h);
    }
    return h;
  }
  if (traits_.dual) return dgnn_forward(tape, stores[0], stores[1], cfg_, x);
  return gnn_forward(tape, stores[0], cfg_, graph_, x);
}

MatrixXd QNetwork::q_batch(StoreSet& stores, const NodeInputs& x) const {
  Tape tape(false);
  return tape.value(forward(tape, stores, x));
}

QOutput QNetwork::q_values(StoreSet& stores, const NodeInputs& x) const {
  QOutput out;
  out.q = q_batch(stores, x).col(0);
  out.offsets = QOutput::make_offsets(cfg_.dims.i_actions, cfg_.n_slots, cfg_.dims.s_actions);
  return out;
}

}  // namespace agentgraph
