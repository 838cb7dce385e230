#pragma once

#include "agentgraph/nn/adam.hpp"
#include "agentgraph/nn/ops.hpp"
#include "agentgraph/nn/parameter_store.hpp"
#include "agentgraph/nn/serialization.hpp"
#include "agentgraph/nn/tape.hpp"
#include "agentgraph/nn/tensor.hpp"

namespace agentgraph {

// The rest of the library runs in double precision.
using Scalar = double;
using Tape = nn::Tape<Scalar>;
using ParameterBlock = nn::ParameterBlock<Scalar>;
using ParameterStore = nn::ParameterStore<Scalar>;
using Adam = nn::Adam<Scalar>;
using nn::MatrixXd;
using nn::Var;
using nn::VectorXd;

}  // namespace agentgraph
