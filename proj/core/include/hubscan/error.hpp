#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hubscan {

enum class ErrorCode {
  bundle_incomplete,
  corrupt_blob,
  integrity,
  shape,
  parameter,
  configuration,
  scope,
  merge,
  safety,
  evaluation,
  degenerate_hub,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace hubscan
