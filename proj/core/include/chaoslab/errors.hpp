#pragma once

#include <stdexcept>
#include <string>

namespace chaoslab {

enum class ErrorKind {
  invalid_input,
  domain,
  out_of_model,
  divergence,
  resource,
  degenerate_window,
  degenerate_sample,
  incomplete_input,
  insufficient_data,
  invalid_comparison,
  accuracy_not_reached,
  unsupported,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by quadrature when refinement stalls; carries what was reached.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& message, double estimate, double error_bound)
      : Error(ErrorKind::accuracy_not_reached, message),
        estimate_(estimate),
        error_bound_(error_bound) {}
  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

// Work or memory estimate above a configured cap.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& message, double estimate, double cap)
      : Error(ErrorKind::resource, message), estimate_(estimate), cap_(cap) {}
  double estimate() const noexcept { return estimate_; }
  double cap() const noexcept { return cap_; }

 private:
  double estimate_;
  double cap_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace chaoslab
