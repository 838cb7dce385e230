#pragma once

#include "agentgraph/errors.hpp"
#include "agentgraph/nn/tape.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <string>
#include <vector>
#include <type_traits>

namespace agentgraph::nn {

namespace detail {

inline std::string shape_str(Index r, Index c) { return "[" + std::to_string(r) + "x" + std::to_string(c) + "]"; }

template <typename Scalar>
bool any_needs_grad(const Tape<Scalar>& t, std::span<const Var> vs) {
  return std::any_of(vs.begin(), vs.end(), [&t](Var v) { return t.needs_grad(v); });
}

}  // namespace detail

/// W·X, X holding one sample per column.
template <typename Scalar>
Var matmul(Tape<Scalar>& t, Var w, Var x) {
  const auto& W = t.value(w);
  const auto& X = t.value(x);
  if (W.cols() != X.rows())
    throw ConfigurationError("matmul shape mismatch " + detail::shape_str(W.rows(), W.cols()) + " * " +
                             detail::shape_str(X.rows(), X.cols()));
  Matrix<Scalar> y;
  y.noalias() = W * X;
  const bool ng = t.needs_grad(w) || t.needs_grad(x);
  return t.record(std::move(y), ng, [w, x](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    if (tp.needs_grad(w)) tp.accumulate(w, g * tp.value(x).transpose());
    if (tp.needs_grad(x)) tp.accumulate(x, tp.value(w).transpose() * g);
  });
}

/// W·X + b (bias broadcast over columns). `bias` may be null for a pure linear map.
template <typename Scalar>
Var affine(Tape<Scalar>& t, ParameterBlock<Scalar>& w, std::type_identity_t<ParameterBlock<Scalar>>* bias, Var x) {
  const Index in_rows = t.value(x).rows();
  if (w.cols() != in_rows)
    throw ConfigurationError("affine: weight '" + w.name + "' is " + detail::shape_str(w.rows(), w.cols()) +
                             " but input has " + std::to_string(in_rows) + " rows");
  if (bias != nullptr && (bias->rows() != w.rows() || bias->cols() != 1))
    throw ConfigurationError("affine: bias '" + bias->name + "' is " + detail::shape_str(bias->rows(), bias->cols()) +
                             " but weight '" + w.name + "' has " + std::to_string(w.rows()) + " outputs");
  const Var wv = t.parameter(w);
  if (bias == nullptr) return matmul(t, wv, x);
  const Var bv = t.parameter(*bias);
  // Fetched after the parameter leaves were pushed: pushing may reallocate node storage.
  const auto& X = t.value(x);
  Matrix<Scalar> y;
  y.noalias() = w.value * X;
  y.colwise() += bias->value.col(0);
  const bool ng = t.needs_grad(wv) || t.needs_grad(bv) || t.needs_grad(x);
  return t.record(std::move(y), ng, [wv, bv, x](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    if (tp.needs_grad(wv)) tp.accumulate(wv, g * tp.value(x).transpose());
    if (tp.needs_grad(bv)) tp.accumulate(bv, g.rowwise().sum());
    if (tp.needs_grad(x)) tp.accumulate(x, tp.value(wv).transpose() * g);
  });
}

/// max(0, x). The subgradient at exactly 0 is taken as 0.
template <typename Scalar>
Var relu(Tape<Scalar>& t, Var x) {
  Matrix<Scalar> y = t.value(x).cwiseMax(Scalar(0));
  return t.record(std::move(y), t.needs_grad(x), [x](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(x, (tp.value(x).array() > Scalar(0)).select(g.array(), Scalar(0)).matrix());
  });
}

template <typename Scalar>
Var add(Tape<Scalar>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw ConfigurationError("add shape mismatch " + detail::shape_str(A.rows(), A.cols()) + " + " +
                             detail::shape_str(B.rows(), B.cols()));
  Matrix<Scalar> y = A + B;
  return t.record(std::move(y), t.needs_grad(a) || t.needs_grad(b), [a, b](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

template <typename Scalar>
Var scale(Tape<Scalar>& t, Var x, Scalar s) {
  Matrix<Scalar> y = t.value(x) * s;
  return t.record(std::move(y), t.needs_grad(x),
                  [x, s](Tape<Scalar>& tp, const Matrix<Scalar>& g) { tp.accumulate(x, g * s); });
}

/// Sum of all entries, as a 1x1 value.
template <typename Scalar>
Var sum(Tape<Scalar>& t, Var x) {
  Matrix<Scalar> y(1, 1);
  y(0, 0) = t.value(x).sum();
  return t.record(std::move(y), t.needs_grad(x), [x](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    const auto& X = tp.value(x);
    tp.accumulate(x, Matrix<Scalar>::Constant(X.rows(), X.cols(), g(0, 0)));
  });
}

/// Stacks the inputs on top of each other (all must share a column count).
template <typename Scalar>
Var vstack(Tape<Scalar>& t, std::span<const Var> parts) {
  if (parts.empty()) throw ConfigurationError("vstack of nothing");
  const Index cols = t.value(parts[0]).cols();
  Index rows = 0;
  for (Var p : parts) {
    if (t.value(p).cols() != cols) throw ConfigurationError("vstack column mismatch");
    rows += t.value(p).rows();
  }
  Matrix<Scalar> y(rows, cols);
  Index r = 0;
  for (Var p : parts) {
    const auto& P = t.value(p);
    y.middleRows(r, P.rows()) = P;
    r += P.rows();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return t.record(std::move(y), detail::any_needs_grad(t, parts), [ps](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    Index row = 0;
    for (Var p : ps) {
      const Index n = tp.value(p).rows();
      tp.accumulate(p, g.middleRows(row, n));
      row += n;
    }
  });
}

/// Elementwise mean of equally shaped inputs.
///
/// Each output entry sums its k contributions in ascending value order, so the result
/// does not depend on the order of `parts` (bitwise); this keeps message aggregation
/// exactly permutation invariant.
template <typename Scalar>
Var mean_of(Tape<Scalar>& t, std::span<const Var> parts) {
  if (parts.empty()) throw ConfigurationError("mean of an empty set");
  const auto& first = t.value(parts[0]);
  for (Var p : parts)
    if (t.value(p).rows() != first.rows() || t.value(p).cols() != first.cols())
      throw ConfigurationError("mean_of shape mismatch");
  const std::size_t k = parts.size();
  const Scalar inv_k = Scalar(1) / static_cast<Scalar>(k);
  Matrix<Scalar> y(first.rows(), first.cols());
  if (k <= 2) {
    y = first;
    if (k == 2) y += t.value(parts[1]);
    y *= inv_k;
  } else {
    std::vector<const Scalar*> src;
    src.reserve(k);
    for (Var p : parts) src.push_back(t.value(p).data());
    std::vector<Scalar> buf(k);
    for (Index i = 0; i < y.size(); ++i) {
      for (std::size_t j = 0; j < k; ++j) buf[j] = src[j][i];
      std::sort(buf.begin(), buf.end());
      Scalar acc = 0;
      for (Scalar v : buf) acc += v;
      y.data()[i] = acc * inv_k;
    }
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return t.record(std::move(y), detail::any_needs_grad(t, parts),
                  [ps, inv_k](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    for (Var p : ps) tp.accumulate(p, g * inv_k);
                  });
}

/// Elementwise max of equally shaped inputs. The gradient goes to the first maximizer.
template <typename Scalar>
Var max_of(Tape<Scalar>& t, std::span<const Var> parts) {
  if (parts.empty()) throw ConfigurationError("max of an empty set");
  const auto& first = t.value(parts[0]);
  Matrix<Scalar> y = first;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> winner =
      Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>::Zero(first.rows(), first.cols());
  for (std::size_t j = 1; j < parts.size(); ++j) {
    const auto& P = t.value(parts[j]);
    if (P.rows() != y.rows() || P.cols() != y.cols()) throw ConfigurationError("max_of shape mismatch");
    for (Index i = 0; i < y.size(); ++i) {
      if (P.data()[i] > y.data()[i]) {
        y.data()[i] = P.data()[i];
        winner.data()[i] = static_cast<int>(j);
      }
    }
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return t.record(std::move(y), detail::any_needs_grad(t, parts),
                  [ps, winner = std::move(winner)](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    for (std::size_t j = 0; j < ps.size(); ++j) {
                      if (!tp.needs_grad(ps[j])) continue;
                      tp.accumulate(ps[j], (winner.array() == static_cast<int>(j)).select(g.array(), Scalar(0)).matrix());
                    }
                  });
}

/// Picks row `rows[c]` of column c, giving a 1 x cols result.
template <typename Scalar>
Var pick(Tape<Scalar>& t, Var x, std::span<const Index> rows) {
  const auto& X = t.value(x);
  if (static_cast<Index>(rows.size()) != X.cols()) throw ConfigurationError("pick: one row index per column required");
  Matrix<Scalar> y(1, X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    const Index r = rows[static_cast<std::size_t>(c)];
    if (r < 0 || r >= X.rows()) throw UsageError("pick: row index out of range");
    y(0, c) = X(r, c);
  }
  std::vector<Index> rs(rows.begin(), rows.end());
  return t.record(std::move(y), t.needs_grad(x), [x, rs](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    const auto& X = tp.value(x);
    Matrix<Scalar> gx = Matrix<Scalar>::Zero(X.rows(), X.cols());
    for (Index c = 0; c < X.cols(); ++c) gx(rs[static_cast<std::size_t>(c)], c) = g(0, c);
    tp.accumulate(x, gx);
  });
}

/// mean((pred - target)^2) over all entries, as a 1x1 value. `target` is treated as a constant.
template <typename Scalar>
Var mse(Tape<Scalar>& t, Var pred, const Matrix<Scalar>& target) {
  const auto& P = t.value(pred);
  if (P.rows() != target.rows() || P.cols() != target.cols()) throw ConfigurationError("mse shape mismatch");
  const Scalar n = static_cast<Scalar>(P.size());
  Matrix<Scalar> diff = P - target;
  Matrix<Scalar> y(1, 1);
  y(0, 0) = diff.squaredNorm() / n;
  return t.record(std::move(y), t.needs_grad(pred),
                  [pred, diff = std::move(diff), n](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                    tp.accumulate(pred, diff * (Scalar(2) * g(0, 0) / n));
                  });
}

}  // namespace agentgraph::nn
