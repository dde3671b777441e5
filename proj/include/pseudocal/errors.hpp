#pragma once

#include <stdexcept>
#include <string>

namespace pseudocal {

// Stable error codes; the CLI maps them to machine-parseable exit lines.
enum class ErrorCode {
  invalid_angle,
  invalid_rotation,
  dimension_mismatch,
  parse_error,
  calib_error,
  format_error,
  empty_sample,
  empty_cloud,
  empty_dataset,
  config_error,
  no_overlap,
  input_error,
  io_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pseudocal
