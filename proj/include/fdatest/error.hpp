#pragma once

#include <stdexcept>
#include <string>

namespace fdatest {

// Every failure the library can raise, as a typed kind plus a human message.
enum class ErrorKind {
  // linear algebra / numerics
  NotSPD,
  DimensionMismatch,
  InvalidParameter,
  NoBracket,
  NoConvergence,
  // decomposition / linear model
  ResolutionExceeded,
  RankDeficient,
  InsufficientDF,
  LengthMismatch,
  EmptyGroup,
  DegenerateHypothesis,
  UnsupportedNu,
  // test statistics
  InvalidWeight,
  NotMonotone,
  InsufficientP,
  MissingCutoff,
  IndexOutOfRange,
  InvalidPosition,
  InvalidB,
  // monte carlo
  EmptySample,
  AllZeroGamma,
  // rate diagnostics
  InvalidRule,
  // file handling / configuration
  ParseError,
  NonMonotoneTime,
  EmptyFile,
  IOError,
  InvalidConfig,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotSPD: return "NotSPD";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ResolutionExceeded: return "ResolutionExceeded";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InsufficientDF: return "InsufficientDF";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::DegenerateHypothesis: return "DegenerateHypothesis";
    case ErrorKind::UnsupportedNu: return "UnsupportedNu";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::InsufficientP: return "InsufficientP";
    case ErrorKind::MissingCutoff: return "MissingCutoff";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InvalidPosition: return "InvalidPosition";
    case ErrorKind::InvalidB: return "InvalidB";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::AllZeroGamma: return "AllZeroGamma";
    case ErrorKind::InvalidRule: return "InvalidRule";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::IOError: return "IOError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace fdatest
