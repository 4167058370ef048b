#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace follownet {

/// Error categories. The CLI maps these to its machine-readable error record.
enum class ErrorKind {
  invalid_argument,  // caller passed parameters outside the operation's domain
  malformed_input,   // a file or stream could not be parsed
  empty_input,
  insufficient_data,
  degenerate,        // data present but the estimate is undefined
  not_converged,
  invalid_structure, // e.g. asymmetric graph, cyclic cascade
  io,
  resource_limit,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(what), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Name of the module that raised the error ("graph_core", "ranking", ...).
  const std::string& module() const noexcept { return module_; }

private:
  ErrorKind kind_;
  std::string module_;
};

} // namespace follownet
