#pragma once

#include <stdexcept>
#include <string>

namespace slv {

/// Raised when a caller breaks an operation's precondition (shape mismatch,
/// unscaled map, invalid partition, ...).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractError(message);
}

}  // namespace slv
