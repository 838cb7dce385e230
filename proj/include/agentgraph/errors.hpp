#pragma once

#include <stdexcept>
#include <string>

namespace agentgraph {

/// Invalid shapes, dimensions or option values detected while building something.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An API was called out of order or with an out-of-range argument.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical failure during optimization (non-finite gradients and the like).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The environment, tracker or a policy broke an agreed contract
/// (unnormalized belief, masked action chosen, nothing selectable).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Reading or writing a checkpoint / data file failed.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace agentgraph
