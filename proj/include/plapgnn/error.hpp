#pragma once

#include <stdexcept>
#include <string>

namespace plap {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  parse,
  validation,
  capacity,
  numeric,
  io,
};

// Single exception type for the whole library; the code survives the trip
// through the C API as a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace plap
