#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsm {

/// Amplitudes with magnitude at or below this are treated as zero.
inline constexpr double kEpsAmp = 1e-12;

/// Probabilities below this count as "not printed" at the reported horizon.
inline constexpr double kEpsProb = 1e-9;

/// Column orthonormality tolerance for rule tables and site unitaries.
inline constexpr double kIsometryTol = 1e-10;

enum class ErrorCode {
    EmptyInput,
    ContainsSpacer,
    BadSymbol,
    MalformedTable,
    UnknownName,
    MissingRule,
    ContractBreach,
    SizeLimit,
    NotDeterministic,
    StepMismatch,
    NotASentence,
    NotExtendedMode,
    PlacementOutOfFrozenRegion,
    IntervalNotFrozen,
    NotUnitary,
    ParseError,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ContainsSpacer: return "ContainsSpacer";
    case ErrorCode::BadSymbol: return "BadSymbol";
    case ErrorCode::MalformedTable: return "MalformedTable";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::MissingRule: return "MissingRule";
    case ErrorCode::ContractBreach: return "ContractBreach";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::NotDeterministic: return "NotDeterministic";
    case ErrorCode::StepMismatch: return "StepMismatch";
    case ErrorCode::NotASentence: return "NotASentence";
    case ErrorCode::NotExtendedMode: return "NotExtendedMode";
    case ErrorCode::PlacementOutOfFrozenRegion: return "PlacementOutOfFrozenRegion";
    case ErrorCode::IntervalNotFrozen: return "IntervalNotFrozen";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

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

} // namespace qsm
