#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergoplan {

enum class ErrorCode {
  InvalidArgument,
  EmptyWindow,
  DegenerateRegion,
  HorizonTooShort,
  HorizonExceeded,
  GridMismatch,
  Infeasible,
  Disconnected,
  ParseError,
  MissingField,
  BadBox,
  TimeInconsistent,
  RegionOutsideWorkspace,
};

[[nodiscard]] auto to_string(ErrorCode code) -> std::string_view;

/// Single exception type for the library; `code()` identifies the failure class.
///
/// `detail()` carries an optional numeric payload, e.g. the missing seconds for
/// HorizonExceeded.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, double detail = 0.0)
      : std::runtime_error(std::string{to_string(code)} + ": " + what), code_{code}, detail_{detail}, message_{what} {}

  [[nodiscard]] auto code() const noexcept -> ErrorCode { return code_; }
  [[nodiscard]] auto detail() const noexcept -> double { return detail_; }
  /// what() without the code prefix.
  [[nodiscard]] auto message() const noexcept -> const std::string& { return message_; }

 private:
  ErrorCode code_;
  double detail_;
  std::string message_;
};

} // namespace ergoplan
