#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qmt {

enum class ErrorKind {
    LayoutConflict,
    InvalidSelection,
    NotHermitian,
    InvalidState,
    SupportMismatch,
    InvalidOutcomeCount,
    InvalidFrequency,
    TruncationTooSmall,
    DivergentBath,
    NotRealizable,
    TooLarge,
    InsufficientSamples,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Compact rendering of a number for diagnostics.
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::LayoutConflict: return "LayoutConflict";
    case ErrorKind::InvalidSelection: return "InvalidSelection";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::InvalidOutcomeCount: return "InvalidOutcomeCount";
    case ErrorKind::InvalidFrequency: return "InvalidFrequency";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::DivergentBath: return "DivergentBath";
    case ErrorKind::NotRealizable: return "NotRealizable";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace qmt
