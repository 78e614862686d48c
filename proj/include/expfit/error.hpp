#pragma once

#include <stdexcept>
#include <string>

namespace expfit {

enum class Errc {
  SingularMatrix,
  NoConvergence,
  InsufficientSamples,
  SingularHankel,
  DegenerateAllZero,
  DuplicateNodes,
  NonpositiveNode,
  NonpositiveArgument,
  BadInterval,
  IndexOutOfRange,
  EtaOutOfRange,
  KOutOfRange,
  NegativeValue,
  SizeCap,
  UnsupportedTail,
  KappaOutOfRange,
  BracketingFailed,
  RecoveryFailed,
  TimeOutOfRange,
  TooFewNodes,
  NoModesRecovered,
  OptimizerDiverged,
  InvalidModel,
  InvalidArgument,
  ParseError,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::SingularHankel: return "SingularHankel";
    case Errc::DegenerateAllZero: return "DegenerateAllZero";
    case Errc::DuplicateNodes: return "DuplicateNodes";
    case Errc::NonpositiveNode: return "NonpositiveNode";
    case Errc::NonpositiveArgument: return "NonpositiveArgument";
    case Errc::BadInterval: return "BadInterval";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::EtaOutOfRange: return "EtaOutOfRange";
    case Errc::KOutOfRange: return "KOutOfRange";
    case Errc::NegativeValue: return "NegativeValue";
    case Errc::SizeCap: return "SizeCap";
    case Errc::UnsupportedTail: return "UnsupportedTail";
    case Errc::KappaOutOfRange: return "KappaOutOfRange";
    case Errc::BracketingFailed: return "BracketingFailed";
    case Errc::RecoveryFailed: return "RecoveryFailed";
    case Errc::TimeOutOfRange: return "TimeOutOfRange";
    case Errc::TooFewNodes: return "TooFewNodes";
    case Errc::NoModesRecovered: return "NoModesRecovered";
    case Errc::OptimizerDiverged: return "OptimizerDiverged";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace expfit
