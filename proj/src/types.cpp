#include "cdasim/types.hpp"

namespace cdasim {

std::string_view to_string(Side s) noexcept { return s == Side::Buy ? "buy" : "sell"; }

std::string_view to_string(AgentType t) noexcept {
  switch (t) {
    case AgentType::Fundamentalist: return "fundamentalist";
    case AgentType::Optimist: return "optimist";
    case AgentType::Pessimist: return "pessimist";
  }
  return "unknown";
}

}  // namespace cdasim
