#pragma once

#include <stdexcept>
#include <string>

namespace parabolica {

enum class ErrorCode {
    DimensionMismatch,
    IdentityGerm,
    NotTangent,
    PointOutsideSector,
    PointOutsideDomain,
    ResonanceDetected,
    NonDiagonalizable,
    DegenerateDirection,
    DegenerateLeadingTerm,
    RootSolveFailed,
    PicardDiverged,
    ResidualTooLarge,
    InsufficientTrace,
    DegenerateFit,
    NonFiniteState,
    CertificateFailed,
    NotInBasin,
    SlowConvergence,
    DomainNeverEntered,
    UnsupportedResonantJordan,
    UnsupportedMixedDirectors,
    LogDegreeOverflow,
    BadInput,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IdentityGerm: return "IdentityGerm";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::PointOutsideSector: return "PointOutsideSector";
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::ResonanceDetected: return "ResonanceDetected";
    case ErrorCode::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::DegenerateLeadingTerm: return "DegenerateLeadingTerm";
    case ErrorCode::RootSolveFailed: return "RootSolveFailed";
    case ErrorCode::PicardDiverged: return "PicardDiverged";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::InsufficientTrace: return "InsufficientTrace";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::CertificateFailed: return "CertificateFailed";
    case ErrorCode::NotInBasin: return "NotInBasin";
    case ErrorCode::SlowConvergence: return "SlowConvergence";
    case ErrorCode::DomainNeverEntered: return "DomainNeverEntered";
    case ErrorCode::UnsupportedResonantJordan: return "UnsupportedResonantJordan";
    case ErrorCode::UnsupportedMixedDirectors: return "UnsupportedMixedDirectors";
    case ErrorCode::LogDegreeOverflow: return "LogDegreeOverflow";
    case ErrorCode::BadInput: return "BadInput";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

    // Extra payload for ResonanceDetected (the offending integer h).
    int detail = -1;

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace parabolica
