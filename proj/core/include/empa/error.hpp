#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace empa {

enum class ErrorCode {
  // encoding
  IllegalOpcode,
  TruncatedInstruction,
  InvalidRegister,
  InvalidOperand,
  // assembly
  SyntaxError,
  UndefinedLabel,
  DuplicateLabel,
  UnmatchedQTermTarget,
  ImageOverflow,
  OverlappingPlacement,
  // machine
  ImageTooLarge,
  AddressOutOfRange,
  WriteToEcc,
  UnknownMode,
  OrphanMassCreate,
  TargetNotQCreate,
  InvalidLinkRegister,
  HaltOutsideRoot,
  QTermInRoot,
  HaltWithLiveChildren,
  InvariantViolation,
  Deadlock,
  WatchdogExpired,
  // analysis and plumbing
  MissingBaseline,
  ConfigError,
  TraceFormat,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `line()` is set for assembly errors,
/// `core()` for faults raised while the machine was running.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Error(ErrorCode code, const std::string& message, std::size_t line)
      : std::runtime_error(message), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  std::optional<std::uint32_t> core() const noexcept { return core_; }

  Error& at_core(std::uint32_t core) {
    core_ = core;
    return *this;
  }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::optional<std::uint32_t> core_;
};

/// True for the errors that stop a running machine (exit status 2 in the CLI).
bool is_runtime_error(ErrorCode code) noexcept;

}  // namespace empa
