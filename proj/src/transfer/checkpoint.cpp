#include "agentgraph/transfer/checkpoint.hpp"

#include "agentgraph/errors.hpp"

#include <fstream>
#include <set>

namespace agentgraph {

namespace {

nlohmann::json dims_to_json(const GnnDims& d) {
  return {{"s_input", d.s_input},   {"i_input", d.i_input}, {"s_hidden", d.s_hidden},   {"i_hidden", d.i_hidden},
          {"s_comm", d.s_comm},     {"i_comm", d.i_comm},   {"s_actions", d.s_actions}, {"i_actions", d.i_actions}};
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw CheckpointError(path + key + ": missing");
  return j.at(key);
}

int require_int(const nlohmann::json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_number_integer()) throw CheckpointError(path + key + ": expected an integer");
  return v.get<int>();
}

std::string require_string(const nlohmann::json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_string()) throw CheckpointError(path + key + ": expected a string");
  return v.get<std::string>();
}

template <typename Parse>
auto parse_field(const std::string& text, const std::string& path, Parse parse) {
  try {
    return parse(text);
  } catch (const ConfigurationError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

}  // namespace

nlohmann::json checkpoint_to_json(const QNetwork& net, const StoreSet& stores, std::string_view domain) {
  const GnnConfig& c = net.config();
  nlohmann::json blocks = nlohmann::json::object();
  for (const auto& s : stores) {
    const nlohmann::json store_blocks = nn::blocks_to_json(s);
    for (const auto& [name, entry] : store_blocks.items()) {
      if (blocks.contains(name)) throw CheckpointError("duplicate block name '" + name + "' across stores");
      blocks[name] = entry;
    }
  }
  return {{"format_version", kCheckpointVersion},
          {"model", to_string(net.kind())},
          {"domain", domain},
          {"graph", {{"structure", to_string(c.structure)}, {"n_slots", c.n_slots}}},
          {"gnn_config",
           {{"comm_steps", c.comm_steps},
            {"aggregation", to_string(c.aggregation)},
            {"use_bias", c.use_bias},
            {"dims", dims_to_json(c.dims)}}},
          {"mlp_config", {{"hidden1", net.mlp_config().hidden1}, {"hidden2", net.mlp_config().hidden2}}},
          {"blocks", blocks}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CheckpointError("root: expected an object");
  const int version = require_int(j, "format_version", "");
  if (version > kCheckpointVersion)
    throw CheckpointError("format_version: " + std::to_string(version) + " is newer than supported version " +
                          std::to_string(kCheckpointVersion));
  Checkpoint ck;
  ck.model = parse_field(require_string(j, "model", ""), "model", [](const std::string& s) { return parse_model(s); });
  ck.domain = require_string(j, "domain", "");
  const auto& graph = require(j, "graph", "");
  ck.gnn.structure = parse_field(require_string(graph, "structure", "graph."), "graph.structure",
                                 [](const std::string& s) { return parse_structure(s); });
  ck.gnn.n_slots = require_int(graph, "n_slots", "graph.");
  const auto& g = require(j, "gnn_config", "");
  ck.gnn.comm_steps = require_int(g, "comm_steps", "gnn_config.");
  const std::string agg = require_string(g, "aggregation", "gnn_config.");
  if (agg != "mean" && agg != "max") throw CheckpointError("gnn_config.aggregation: expected \"mean\" or \"max\"");
  ck.gnn.aggregation = agg == "mean" ? Aggregation::Mean : Aggregation::Max;
  const auto& bias = require(g, "use_bias", "gnn_config.");
  if (!bias.is_boolean()) throw CheckpointError("gnn_config.use_bias: expected a boolean");
  ck.gnn.use_bias = bias.get<bool>();
  const auto& d = require(g, "dims", "gnn_config.");
  const std::string dp = "gnn_config.dims.";
  ck.gnn.dims = {require_int(d, "s_input", dp),  require_int(d, "i_input", dp),   require_int(d, "s_hidden", dp),
                 require_int(d, "i_hidden", dp), require_int(d, "s_comm", dp),    require_int(d, "i_comm", dp),
                 require_int(d, "s_actions", dp), require_int(d, "i_actions", dp)};
  const auto& m = require(j, "mlp_config", "");
  ck.mlp = {require_int(m, "hidden1", "mlp_config."), require_int(m, "hidden2", "mlp_config.")};
  try {
    ck.gnn.validate();
  } catch (const ConfigurationError& e) {
    throw CheckpointError(std::string("gnn_config: ") + e.what());
  }
  const auto& blocks = require(j, "blocks", "");
  if (!blocks.is_object()) throw CheckpointError("blocks: expected an object");
  for (const auto& [name, entry] : blocks.items()) {
    auto b = nn::block_from_json<Scalar>(name, entry);
    ck.blocks.add(name, b.rows(), b.cols()).value = std::move(b.value);
  }
  return ck;
}

void export_policy(const QNetwork& net, const StoreSet& stores, std::string_view domain, const std::string& path) {
  const auto j = checkpoint_to_json(net, stores, domain);
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out << j.dump(1) << '\n';
  if (!out) throw CheckpointError("failed writing checkpoint " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

ImportResult import_policy(const Checkpoint& ckpt, const QNetwork& target, Rng& rng) {
  ImportResult r;
  r.stores = target.make_parameters(rng);
  std::vector<std::string> mismatched;
  std::set<std::string> used;
  for (auto& store : r.stores) {
    for (auto& [name, block] : store) {
      if (!ckpt.blocks.contains(name)) {
        r.warnings.push_back("block '" + name + "' not in checkpoint; initialized fresh");
        continue;
      }
      const auto& src = ckpt.blocks.at(name);
      if (src.rows() != block.rows() || src.cols() != block.cols()) {
        mismatched.push_back(name + " (checkpoint " + std::to_string(src.rows()) + "x" + std::to_string(src.cols()) +
                             ", target " + std::to_string(block.rows()) + "x" + std::to_string(block.cols()) + ")");
        continue;
      }
      block.value = src.value;
      used.insert(name);
    }
  }
  if (!mismatched.empty()) {
    std::string msg = "checkpoint is incompatible with the target network; mismatched blocks:";
    for (const auto& m : mismatched) msg += "\n  " + m;
    throw ConfigurationError(msg);
  }
  if (used.empty()) throw ConfigurationError("checkpoint shares no parameter blocks with the target network");
  for (const auto& name : ckpt.blocks.names())
    if (!used.contains(name)) r.warnings.push_back("checkpoint block '" + name + "' unused by the target network");
  return r;
}

ImportResult import_policy(const std::string& path, const QNetwork& target, Rng& rng) {
  return import_policy(read_checkpoint(path), target, rng);
}

}  // namespace agentgraph
