#include "chaoslab/errors.hpp"

namespace chaoslab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::domain: return "domain";
    case ErrorKind::out_of_model: return "out-of-model";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::resource: return "resource";
    case ErrorKind::degenerate_window: return "degenerate-window";
    case ErrorKind::degenerate_sample: return "degenerate-sample";
    case ErrorKind::incomplete_input: return "incomplete-input";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::invalid_comparison: return "invalid-comparison";
    case ErrorKind::accuracy_not_reached: return "accuracy-not-reached";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace chaoslab
