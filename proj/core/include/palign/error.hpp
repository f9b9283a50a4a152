#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace palign {

/// Categories of failure. The CLI maps `io` and `format` to exit code 3 and
/// everything else to exit code 2.
enum class ErrorKind {
  parameter,
  dimension,
  data,
  format,
  io,
  index,
  pairing,
  fitting,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace palign
