#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entl {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
    InvalidInput,
    UnsupportedPair,
    AmbientMismatch,
    NotLFinite,
    NotLocallyFinite,
    NotInvertible,
    NotEquivariant,
    NonCommuting,
    CapExceeded,
    PrecisionExhausted,
    WindowTooSmall,
    NotRecognized,
    NotAscending,
    TooLarge,
};

inline std::string_view to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::UnsupportedPair: return "UnsupportedPair";
    case ErrorKind::AmbientMismatch: return "AmbientMismatch";
    case ErrorKind::NotLFinite: return "NotLFinite";
    case ErrorKind::NotLocallyFinite: return "NotLocallyFinite";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::NotEquivariant: return "NotEquivariant";
    case ErrorKind::NonCommuting: return "NonCommuting";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::NotRecognized: return "NotRecognized";
    case ErrorKind::NotAscending: return "NotAscending";
    case ErrorKind::TooLarge: return "TooLarge";
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

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

} // namespace entl
