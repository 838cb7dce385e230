#pragma once

#include "agentgraph/errors.hpp"
#include "agentgraph/nn/tensor.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace agentgraph::nn {

/// A named trainable tensor with its accumulated gradient.
/// Vectors (biases) are stored as single-column matrices.
template <typename Scalar>
struct ParameterBlock {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> gradient;

  ParameterBlock(std::string n, Index rows, Index cols)
      : name(std::move(n)), value(Matrix<Scalar>::Zero(rows, cols)), gradient(Matrix<Scalar>::Zero(rows, cols)) {}

  Index rows() const { return value.rows(); }
  Index cols() const { return value.cols(); }
  bool is_vector() const { return value.cols() == 1; }
};

/// Name-keyed collection of parameter blocks.
///
/// Looking a name up twice yields the same block object; this is how weight
/// tying works (every S-agent resolves to the same `.../S/...` blocks).
/// Copying a store deep-copies values, which is what a target network wants.
template <typename Scalar>
class ParameterStore {
 public:
  using Block = ParameterBlock<Scalar>;
  using Map = std::map<std::string, Block, std::less<>>;

  /// Returns the existing block when name and shape agree, creates it otherwise.
  Block& get_or_add(const std::string& name, Index rows, Index cols) {
    auto it = blocks_.find(name);
    if (it != blocks_.end()) {
      if (it->second.rows() != rows || it->second.cols() != cols)
        throw ConfigurationError("parameter '" + name + "' requested as " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + " but stored as " + std::to_string(it->second.rows()) +
                                 "x" + std::to_string(it->second.cols()));
      return it->second;
    }
    return blocks_.try_emplace(name, name, rows, cols).first->second;
  }

  Block& add(const std::string& name, Index rows, Index cols) {
    if (contains(name)) throw ConfigurationError("duplicate parameter name '" + name + "'");
    return blocks_.try_emplace(name, name, rows, cols).first->second;
  }

  bool contains(std::string_view name) const { return blocks_.find(name) != blocks_.end(); }

  Block& at(std::string_view name) {
    auto it = blocks_.find(name);
    if (it == blocks_.end()) throw UsageError("unknown parameter '" + std::string(name) + "'");
    return it->second;
  }
  const Block& at(std::string_view name) const { return const_cast<ParameterStore*>(this)->at(name); }

  void erase(std::string_view name) {
    auto it = blocks_.find(name);
    if (it != blocks_.end()) blocks_.erase(it);
  }

  void zero_gradients() {
    for (auto& [_, b] : blocks_) b.gradient.setZero();
  }

  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [_, b] : blocks_) n += static_cast<std::size_t>(b.value.size());
    return n;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(blocks_.size());
    for (const auto& [k, _] : blocks_) out.push_back(k);
    return out;
  }

  auto begin() { return blocks_.begin(); }
  auto end() { return blocks_.end(); }
  auto begin() const { return blocks_.begin(); }
  auto end() const { return blocks_.end(); }

 private:
  Map blocks_;
};

/// Copies every value of `from` into `to`. Both must hold the same names and shapes.
template <typename Scalar>
void copy_values(const ParameterStore<Scalar>& from, ParameterStore<Scalar>& to) {
  if (from.size() != to.size())
    throw ConfigurationError("parameter stores differ in block count (" + std::to_string(from.size()) + " vs " +
                             std::to_string(to.size()) + ")");
  for (const auto& [name, src] : from) {
    if (!to.contains(name)) throw ConfigurationError("target store lacks block '" + name + "'");
    auto& dst = to.at(name);
    if (dst.rows() != src.rows() || dst.cols() != src.cols())
      throw ConfigurationError("shape mismatch for block '" + name + "'");
    dst.value = src.value;
  }
}

/// FNV-1a over the raw bytes of every value, in name order.
template <typename Scalar>
std::uint64_t fingerprint(const ParameterStore<Scalar>& store) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, b] : store) {
    mix(name.data(), name.size());
    mix(b.value.data(), sizeof(Scalar) * static_cast<std::size_t>(b.value.size()));
  }
  return h;
}

}  // namespace agentgraph::nn
