#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stencilstream {

// Failure categories. Each maps to a distinct process exit code in the CLI.
enum class ErrorKind {
    usage,
    config,
    extent,
    capacity,
    codec,
    stability,
    schedule,
    incompatible,
    io,
};

std::string_view to_string(ErrorKind kind);
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace stencilstream
