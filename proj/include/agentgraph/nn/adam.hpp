#pragma once

#include "agentgraph/errors.hpp"
#include "agentgraph/nn/parameter_store.hpp"

#include <cmath>
#include <map>
#include <string>

namespace agentgraph::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments, one moment pair per parameter block.
/// Moments are keyed by block name, so aliased uses of a block share one update.
template <typename Scalar>
class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {}

  const AdamOptions& options() const { return opts_; }
  void set_lr(double lr) { opts_.lr = lr; }
  long steps() const { return t_; }

  /// Applies one update to every block and zeroes the gradients.
  /// Throws TrainingError (and leaves values untouched) if any gradient is non-finite.
  void step(ParameterStore<Scalar>& store) {
    for (const auto& [name, block] : store)
      if (!all_finite(block.gradient)) throw TrainingError("non-finite gradient in parameter block '" + name + "'");

    ++t_;
    const Scalar b1 = static_cast<Scalar>(opts_.beta1);
    const Scalar b2 = static_cast<Scalar>(opts_.beta2);
    const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(opts_.beta1, static_cast<double>(t_)));
    const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(opts_.beta2, static_cast<double>(t_)));
    const Scalar lr = static_cast<Scalar>(opts_.lr);
    const Scalar eps = static_cast<Scalar>(opts_.eps);

    for (auto& [name, block] : store) {
      auto [it, fresh] = moments_.try_emplace(name);
      Moments& m = it->second;
      if (fresh || m.first.rows() != block.rows() || m.first.cols() != block.cols()) {
        m.first = Matrix<Scalar>::Zero(block.rows(), block.cols());
        m.second = Matrix<Scalar>::Zero(block.rows(), block.cols());
      }
      m.first = b1 * m.first + (Scalar(1) - b1) * block.gradient;
      m.second = b2 * m.second + (Scalar(1) - b2) * block.gradient.cwiseAbs2();
      block.value.array() -=
          lr * (m.first.array() / c1) / ((m.second.array() / c2).sqrt() + eps);
      block.gradient.setZero();
    }
  }

  void reset() {
    moments_.clear();
    t_ = 0;
  }

 private:
  struct Moments {
    Matrix<Scalar> first;
    Matrix<Scalar> second;
  };

  AdamOptions opts_;
  long t_ = 0;
  std::map<std::string, Moments, std::less<>> moments_;
};

}  // namespace agentgraph::nn
