#include "empa/error.hpp"

namespace empa {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IllegalOpcode: return "IllegalOpcode";
    case ErrorCode::TruncatedInstruction: return "TruncatedInstruction";
    case ErrorCode::InvalidRegister: return "InvalidRegister";
    case ErrorCode::InvalidOperand: return "InvalidOperand";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UndefinedLabel: return "UndefinedLabel";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::UnmatchedQTermTarget: return "UnmatchedQTermTarget";
    case ErrorCode::ImageOverflow: return "ImageOverflow";
    case ErrorCode::OverlappingPlacement: return "OverlappingPlacement";
    case ErrorCode::ImageTooLarge: return "ImageTooLarge";
    case ErrorCode::AddressOutOfRange: return "AddressOutOfRange";
    case ErrorCode::WriteToEcc: return "WriteToEcc";
    case ErrorCode::UnknownMode: return "UnknownMode";
    case ErrorCode::OrphanMassCreate: return "OrphanMassCreate";
    case ErrorCode::TargetNotQCreate: return "TargetNotQCreate";
    case ErrorCode::InvalidLinkRegister: return "InvalidLinkRegister";
    case ErrorCode::HaltOutsideRoot: return "HaltOutsideRoot";
    case ErrorCode::QTermInRoot: return "QTermInRoot";
    case ErrorCode::HaltWithLiveChildren: return "HaltWithLiveChildren";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::Deadlock: return "Deadlock";
    case ErrorCode::WatchdogExpired: return "WatchdogExpired";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TraceFormat: return "TraceFormat";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_runtime_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IllegalOpcode:
    case ErrorCode::TruncatedInstruction:
    case ErrorCode::InvalidRegister:
    case ErrorCode::AddressOutOfRange:
    case ErrorCode::WriteToEcc:
    case ErrorCode::UnknownMode:
    case ErrorCode::OrphanMassCreate:
    case ErrorCode::TargetNotQCreate:
    case ErrorCode::InvalidLinkRegister:
    case ErrorCode::HaltOutsideRoot:
    case ErrorCode::QTermInRoot:
    case ErrorCode::HaltWithLiveChildren:
    case ErrorCode::InvariantViolation:
    case ErrorCode::Deadlock:
    case ErrorCode::WatchdogExpired: return true;
    default: return false;
  }
}

}  // namespace empa
