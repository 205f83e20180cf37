#include "hubscan/error.hpp"

namespace hubscan {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::bundle_incomplete: return "bundle_incomplete";
    case ErrorCode::corrupt_blob: return "corrupt_blob";
    case ErrorCode::integrity: return "integrity";
    case ErrorCode::shape: return "shape";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::scope: return "scope";
    case ErrorCode::merge: return "merge";
    case ErrorCode::safety: return "safety";
    case ErrorCode::evaluation: return "evaluation";
    case ErrorCode::degenerate_hub: return "degenerate_hub";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace hubscan
