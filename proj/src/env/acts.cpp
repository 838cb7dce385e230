#include "agentgraph/env/acts.hpp"

namespace agentgraph {

std::string_view to_string(ActType a) {
  switch (a) {
    case ActType::Inform: return "inform";
    case ActType::Request: return "request";
    case ActType::Confirm: return "confirm";
    case ActType::Select: return "select";
    case ActType::Bye: return "bye";
    case ActType::Null: return "null";
    case ActType::Reqmore: return "reqmore";
    case ActType::Offer: return "offer";
  }
  return "?";
}

}  // namespace agentgraph
