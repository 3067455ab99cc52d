#pragma once

#include <stdexcept>
#include <string>

namespace anderson {

enum class ErrorCode {
    NonMonotoneBreakpoints,
    SupportOutOfRange,
    NonFiniteValue,
    KTooSmall,
    NonRealK,
    NonPositiveK,
    OutOfClosedFormRange,
    ZeroReflection,
    WitnessNotFound,
    SpecMismatch,
    Overflow,
    NumericOverflow,
    InvalidArgument,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonMonotoneBreakpoints: return "NonMonotoneBreakpoints";
    case ErrorCode::SupportOutOfRange: return "SupportOutOfRange";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::KTooSmall: return "KTooSmall";
    case ErrorCode::NonRealK: return "NonRealK";
    case ErrorCode::NonPositiveK: return "NonPositiveK";
    case ErrorCode::OutOfClosedFormRange: return "OutOfClosedFormRange";
    case ErrorCode::ZeroReflection: return "ZeroReflection";
    case ErrorCode::WitnessNotFound: return "WitnessNotFound";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace anderson
