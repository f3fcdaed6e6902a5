#pragma once

#include <stdexcept>
#include <string>

namespace qpat {

enum class ErrorCode {
  Config,        // invalid parameters, incompatible grids, usage
  Coefficient,   // non-positive leading coefficient
  NotConverged,  // iterative solver ran out of iterations
  EmptyRegion,   // no node satisfies the reliability criteria
  PathLeavesData,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Process exit codes used by the CLI: 0 ok, 2 config/usage, 3 solver
// failure, 4 empty reliable region, 5 I/O.
int exit_code_for(ErrorCode code) noexcept;

[[noreturn]] void throw_config(const std::string& what);
[[noreturn]] void throw_io(const std::string& what);

}  // namespace qpat
