#pragma once

#include "agentgraph/policy/q_network.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace agentgraph {

// Schema: docs/checkpoint.schema.json. Readers refuse newer versions.
inline constexpr int kCheckpointVersion = 1;

/// Everything needed to rebuild a trained network. Blocks of every store live in one flat
/// map; block names are unique across streams.
struct Checkpoint {
  ModelKind model = ModelKind::FmDgnn;
  GnnConfig gnn;
  MlpConfig mlp;
  std::string domain;
  ParameterStore blocks;
};

nlohmann::json checkpoint_to_json(const QNetwork& net, const StoreSet& stores, std::string_view domain);
/// Errors name the first invalid field (e.g. "gnn_config.dims.s_hidden: expected an integer").
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// Writes the checkpoint; I/O failures are a CheckpointError naming the path.
void export_policy(const QNetwork& net, const StoreSet& stores, std::string_view domain, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

struct ImportResult {
  StoreSet stores;
  std::vector<std::string> warnings;  // blocks initialized fresh, checkpoint blocks left unused
};

/// Builds parameters for `target` (any slot count) from a checkpoint. Blocks are matched by
/// name; blocks the checkpoint lacks are freshly initialized from `rng` with a warning. Any
/// shape disagreement is a ConfigurationError listing every offending block.
ImportResult import_policy(const Checkpoint& ckpt, const QNetwork& target, Rng& rng);
ImportResult import_policy(const std::string& path, const QNetwork& target, Rng& rng);

}  // namespace agentgraph
