#include "qpat/errors.hpp"

namespace qpat {

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Coefficient:
      return 2;
    case ErrorCode::NotConverged:
      return 3;
    case ErrorCode::EmptyRegion:
      return 4;
    case ErrorCode::PathLeavesData:
    case ErrorCode::Io:
      return 5;
  }
  return 1;
}

void throw_config(const std::string& what) { throw Error(ErrorCode::Config, what); }

void throw_io(const std::string& what) { throw Error(ErrorCode::Io, what); }

}  // namespace qpat
