#pragma once

#include <stdexcept>
#include <string>

namespace ietpwi {

enum class ErrorKind {
    NonPositiveLength,
    OutOfDomain,
    RauzyUndefined,
    Reducible,
    BudgetExceeded,
    IntervalOutOfRange,
    NonUnitSpeed,
    DomainMismatch,
    LevelMismatch,
    AtomsOverlap,
    AtomMissesCurve,
    UnclassifiablePoint,
    InsufficientGap,
    ExhaustedResamples,
    DegenerateSegment,
    InvalidInput,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ietpwi
