#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcv {

enum class ErrorCode
{
    ConstantColumn,
    NonFiniteInput,
    BadShape,
    NotStandardized,
    DegenerateGrid,
    SingularGram,
    SupportTooLarge,
    InvalidSupport,
    DimensionMismatch,
    BadK,
    BadSizes,
    LengthMismatch,
    NotPositiveDefinite,
    AllLambdasDisqualified,
    InvalidMethod,
    BadConfig,
    ParseError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::BadShape: return "BadShape";
        case ErrorCode::NotStandardized: return "NotStandardized";
        case ErrorCode::DegenerateGrid: return "DegenerateGrid";
        case ErrorCode::SingularGram: return "SingularGram";
        case ErrorCode::SupportTooLarge: return "SupportTooLarge";
        case ErrorCode::InvalidSupport: return "InvalidSupport";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::BadK: return "BadK";
        case ErrorCode::BadSizes: return "BadSizes";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::AllLambdasDisqualified: return "AllLambdasDisqualified";
        case ErrorCode::InvalidMethod: return "InvalidMethod";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/**
 * Single exception type for every failure raised by the library.
 * The code identifies the failure class; the message carries the detail
 * (offending column, row, sizes).
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail)
        , code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mcv
