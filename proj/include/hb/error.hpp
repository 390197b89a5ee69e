#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hb {

using cplx = std::complex<double>;

enum class Errc {
  DomainError,
  EvalAtSingularity,
  PrecisionLoss,
  NoLimit,
  GridMismatch,
  Inconclusive,
  NotLogIntegrable,
  IllConditioned,
  TailNotDecayed,
  NegativeSymbol,
  IsInner,
  NotContractive,
  NotInSpace,
  NotInE0,
  NotDiscrete,
  TailTooLarge,
  NodeZero,
  DivisionRemainder,
  DivisionUnstable,
  NotAZero,
  ParseError,
  ValidationError,
  InvalidArgument,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::DomainError: return "DomainError";
    case Errc::EvalAtSingularity: return "EvalAtSingularity";
    case Errc::PrecisionLoss: return "PrecisionLoss";
    case Errc::NoLimit: return "NoLimit";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::Inconclusive: return "Inconclusive";
    case Errc::NotLogIntegrable: return "NotLogIntegrable";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::TailNotDecayed: return "TailNotDecayed";
    case Errc::NegativeSymbol: return "NegativeSymbol";
    case Errc::IsInner: return "IsInner";
    case Errc::NotContractive: return "NotContractive";
    case Errc::NotInSpace: return "NotInSpace";
    case Errc::NotInE0: return "NotInE0";
    case Errc::NotDiscrete: return "NotDiscrete";
    case Errc::TailTooLarge: return "TailTooLarge";
    case Errc::NodeZero: return "NodeZero";
    case Errc::DivisionRemainder: return "DivisionRemainder";
    case Errc::DivisionUnstable: return "DivisionUnstable";
    case Errc::NotAZero: return "NotAZero";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this exception; `code()`
/// tells callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace hb
