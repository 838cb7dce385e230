#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace agentgraph {

using Index = Eigen::Index;
using Rng = std::mt19937_64;

namespace nn {

// Column-major dense storage. Batched activations are laid out one sample per column.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().array().isFinite().all();
}

/// Glorot/Xavier uniform: U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))).
template <typename Scalar>
void glorot_uniform(Matrix<Scalar>& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  // Fill in row-major order so the draw sequence matches the checkpoint layout.
  for (Index r = 0; r < w.rows(); ++r)
    for (Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(dist(rng));
}

}  // namespace nn

using nn::MatrixXd;
using nn::VectorXd;

}  // namespace agentgraph
