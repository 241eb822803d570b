#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcpert {

enum class ErrorKind {
  InvalidInput,
  NotUnichain,
  DeviationUnavailable,
  InvalidTabooSpec,
  NoUniformColumn,
  TabooNotProper,
  NoFeasibleAlpha,
  DegeneratePerturbation,
  NoCertificate,
  OutOfDomain,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotUnichain: return "NotUnichain";
    case ErrorKind::DeviationUnavailable: return "DeviationUnavailable";
    case ErrorKind::InvalidTabooSpec: return "InvalidTabooSpec";
    case ErrorKind::NoUniformColumn: return "NoUniformColumn";
    case ErrorKind::TabooNotProper: return "TabooNotProper";
    case ErrorKind::NoFeasibleAlpha: return "NoFeasibleAlpha";
    case ErrorKind::DegeneratePerturbation: return "DegeneratePerturbation";
    case ErrorKind::NoCertificate: return "NoCertificate";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the kinds above so
// callers (and tests) can branch on the kind rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace mcpert
