#pragma once

// Error taxonomy. Every failure mode that callers may want to branch on gets
// its own kind; the CLI maps kinds to exit codes.

#include <stdexcept>
#include <string>

namespace refflow {

enum class ErrorKind {
    SingularMetric,
    NonFiniteInput,
    OutsideOverlap,
    NullOrTimelikeField,
    VanishingField,
    MaxStepsExceeded,
    BlowUp,
    SingularGradient,
    InsufficientCoverage,
    BoundUnavailable,
    StepTooSmall,
    DegreeOutOfRange,
    DomainError,
    SuperluminalVelocity,
    ParseError,
    ValidationError,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::SingularMetric: return "SingularMetric";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::OutsideOverlap: return "OutsideOverlap";
        case ErrorKind::NullOrTimelikeField: return "NullOrTimelikeField";
        case ErrorKind::VanishingField: return "VanishingField";
        case ErrorKind::MaxStepsExceeded: return "MaxStepsExceeded";
        case ErrorKind::BlowUp: return "BlowUp";
        case ErrorKind::SingularGradient: return "SingularGradient";
        case ErrorKind::InsufficientCoverage: return "InsufficientCoverage";
        case ErrorKind::BoundUnavailable: return "BoundUnavailable";
        case ErrorKind::StepTooSmall: return "StepTooSmall";
        case ErrorKind::DegreeOutOfRange: return "DegreeOutOfRange";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::SuperluminalVelocity: return "SuperluminalVelocity";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace refflow
