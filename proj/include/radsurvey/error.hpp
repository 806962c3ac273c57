#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radsurvey {

enum class ErrorCode {
  Extent,         // query or trajectory outside a raster extent
  Geometry,       // degenerate or invalid geometry
  Validity,       // malformed ring / polygon
  Config,         // configuration violates a precondition
  Domain,         // argument outside the mathematical domain
  Unreachable,    // no path exists
  RankDeficient,  // singular normal equations
  Numeric,        // non-finite intermediate value
  Estimation,     // data carries too little information
  Data,           // required measurement fields missing
  Sequencing,     // mission stage run out of order
  StaleConfig,    // artifact produced by a different configuration
  Conflict,       // optimistic version check failed
  Io,             // file system or parse failure
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace radsurvey
