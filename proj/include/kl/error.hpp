#pragma once

#include <stdexcept>
#include <string>

namespace kl {

enum class Err {
    OutOfDomain,
    Range,
    Degenerate,
    UndefinedAtMin,
    Stalled,
    Overlap,
    NotStarShaped,
    CriticalValue,
    Divergent,
    StepTooLarge,
    NoConvergence,
    DescentViolation,
    EmptyValley,
    BadInput,
};

inline const char* to_string(Err e) {
    switch (e) {
        case Err::OutOfDomain:      return "OUT_OF_DOMAIN";
        case Err::Range:            return "RANGE";
        case Err::Degenerate:       return "DEGENERATE";
        case Err::UndefinedAtMin:   return "UNDEFINED_AT_MIN";
        case Err::Stalled:          return "STALLED";
        case Err::Overlap:          return "OVERLAP";
        case Err::NotStarShaped:    return "NOT_STAR_SHAPED";
        case Err::CriticalValue:    return "CRITICAL_VALUE";
        case Err::Divergent:        return "DIVERGENT";
        case Err::StepTooLarge:     return "STEP_TOO_LARGE";
        case Err::NoConvergence:    return "NO_CONVERGENCE";
        case Err::DescentViolation: return "DESCENT_VIOLATION";
        case Err::EmptyValley:      return "EMPTY_VALLEY";
        case Err::BadInput:         return "BAD_INPUT";
    }
    return "?";
}

struct Error : std::runtime_error {
    Err code;
    // optional payload, e.g. the offending pair of segment indices
    long a = -1;
    long b = -1;

    Error(Err c, const std::string& what, long ia = -1, long ib = -1)
        : std::runtime_error(std::string(to_string(c)) + ": " + what), code(c), a(ia), b(ib) {}
};

} // namespace kl
