#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aer {

enum class ErrorKind {
  DegenerateInput,
  UnimputableChannel,
  InsufficientData,
  Dimension,
  Divergence,
  Alignment,
  Coverage,
  Parse,
  Io,
  Config,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "degenerate input";
    case ErrorKind::UnimputableChannel: return "unimputable channel";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::Dimension: return "dimension mismatch";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "io error";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

/// Every failure raised by the library carries a kind so callers can branch
/// without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace aer
