#pragma once

#include <string_view>

namespace agentgraph {

enum class UserKind { Standard, Unfriendly };

std::string_view to_string(UserKind u);

/// Environment settings; pair with a Domain to get one benchmark task.
struct TaskConfig {
  int env = 1;  // 1..6, informational once the fields below are set
  double ser = 0.0;
  bool masks = true;
  UserKind user = UserKind::Standard;
  int max_turns = 25;

  void validate() const;
};

/// Canonical environment rows: SER / masks / user for env 1..6.
TaskConfig make_task(int env);

inline constexpr int kEnvironmentCount = 6;

}  // namespace agentgraph
