#pragma once

#include "agentgraph/errors.hpp"
#include "agentgraph/nn/parameter_store.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace agentgraph::nn {

inline constexpr int kStoreFormatVersion = 1;

/// {name: {shape, values}} with row-major values. Vectors get a one-element shape.
/// Doubles are written in shortest round-trip form, so a reload is bit-exact.
template <typename Scalar>
nlohmann::json blocks_to_json(const ParameterStore<Scalar>& store) {
  nlohmann::json blocks = nlohmann::json::object();
  for (const auto& [name, b] : store) {
    nlohmann::json shape = b.is_vector() ? nlohmann::json::array({b.rows()}) : nlohmann::json::array({b.rows(), b.cols()});
    nlohmann::json values = nlohmann::json::array();
    for (Index r = 0; r < b.rows(); ++r)
      for (Index c = 0; c < b.cols(); ++c) values.push_back(static_cast<double>(b.value(r, c)));
    blocks[name] = {{"shape", std::move(shape)}, {"values", std::move(values)}};
  }
  return blocks;
}

/// Parses one block entry; errors name the offending field path.
template <typename Scalar>
ParameterBlock<Scalar> block_from_json(const std::string& name, const nlohmann::json& j) {
  const std::string where = "blocks." + name;
  if (!j.is_object()) throw CheckpointError(where + ": expected an object");
  if (!j.contains("shape") || !j["shape"].is_array()) throw CheckpointError(where + ".shape: missing or not an array");
  if (!j.contains("values") || !j["values"].is_array()) throw CheckpointError(where + ".values: missing or not an array");
  const auto& shape = j["shape"];
  if (shape.empty() || shape.size() > 2) throw CheckpointError(where + ".shape: expected 1 or 2 extents");
  for (const auto& e : shape)
    if (!e.is_number_integer() || e.get<long long>() < 1) throw CheckpointError(where + ".shape: extents must be positive integers");
  const Index rows = shape[0].get<Index>();
  const Index cols = shape.size() == 2 ? shape[1].get<Index>() : 1;
  const auto& values = j["values"];
  if (static_cast<Index>(values.size()) != rows * cols)
    throw CheckpointError(where + ".values: expected " + std::to_string(rows * cols) + " entries, found " +
                          std::to_string(values.size()));
  ParameterBlock<Scalar> block(name, rows, cols);
  std::size_t k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c, ++k) {
      const auto& v = values[k];
      if (!v.is_number()) throw CheckpointError(where + ".values[" + std::to_string(k) + "]: not a number");
      block.value(r, c) = static_cast<Scalar>(v.get<double>());
    }
  return block;
}

template <typename Scalar>
nlohmann::json store_to_json(const ParameterStore<Scalar>& store) {
  return {{"format_version", kStoreFormatVersion}, {"blocks", blocks_to_json(store)}};
}

template <typename Scalar>
ParameterStore<Scalar> store_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CheckpointError("root: expected an object");
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw CheckpointError("format_version: missing or not an integer");
  const int version = j["format_version"].get<int>();
  if (version > kStoreFormatVersion)
    throw CheckpointError("format_version: " + std::to_string(version) + " is newer than supported version " +
                          std::to_string(kStoreFormatVersion));
  if (!j.contains("blocks") || !j["blocks"].is_object()) throw CheckpointError("blocks: missing or not an object");
  ParameterStore<Scalar> store;
  for (const auto& [name, entry] : j["blocks"].items()) {
    auto parsed = block_from_json<Scalar>(name, entry);
    store.add(name, parsed.rows(), parsed.cols()).value = std::move(parsed.value);
  }
  return store;
}

}  // namespace agentgraph::nn
