#include "follownet/error.hpp"

namespace follownet {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::malformed_input: return "malformed_input";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::not_converged: return "not_converged";
    case ErrorKind::invalid_structure: return "invalid_structure";
    case ErrorKind::io: return "io";
    case ErrorKind::resource_limit: return "resource_limit";
  }
  return "unknown";
}

} // namespace follownet
