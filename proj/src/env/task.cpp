#include "agentgraph/env/task.hpp"

#include "agentgraph/errors.hpp"

#include <string>

namespace agentgraph {

std::string_view to_string(UserKind u) { return u == UserKind::Standard ? "standard" : "unfriendly"; }

void TaskConfig::validate() const {
  if (!(ser >= 0.0 && ser <= 1.0)) throw ConfigurationError("SER must lie in [0, 1], got " + std::to_string(ser));
  if (max_turns < 1) throw ConfigurationError("max_turns must be >= 1");
}

TaskConfig make_task(int env) {
  struct Row {
    double ser;
    bool masks;
    UserKind user;
  };
  static constexpr Row rows[kEnvironmentCount] = {
      {0.00, true, UserKind::Standard},  {0.00, false, UserKind::Standard}, {0.15, true, UserKind::Standard},
      {0.15, false, UserKind::Standard}, {0.15, true, UserKind::Unfriendly}, {0.30, true, UserKind::Standard},
  };
  if (env < 1 || env > kEnvironmentCount)
    throw ConfigurationError("unknown environment " + std::to_string(env) + " (valid: 1..6)");
  const Row& r = rows[env - 1];
  TaskConfig t;
  t.env = env;
  t.ser = r.ser;
  t.masks = r.masks;
  t.user = r.user;
  return t;
}

}  // namespace agentgraph
