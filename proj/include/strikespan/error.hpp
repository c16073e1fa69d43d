#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strikespan {

enum class ErrorKind {
    UnknownPayoff,
    BadParams,
    NotConvex,
    ArbitrageViolation,
    TailConditionFailed,
    QuadratureNoConvergence,
    SecondDerivativeUnavailable,
    DensityUnavailable,
    BadWindow,
    BadGrid,
    DataError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::UnknownPayoff: return "UnknownPayoff";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::ArbitrageViolation: return "ArbitrageViolation";
    case ErrorKind::TailConditionFailed: return "TailConditionFailed";
    case ErrorKind::QuadratureNoConvergence: return "QuadratureNoConvergence";
    case ErrorKind::SecondDerivativeUnavailable: return "SecondDerivativeUnavailable";
    case ErrorKind::DensityUnavailable: return "DensityUnavailable";
    case ErrorKind::BadWindow: return "BadWindow";
    case ErrorKind::BadGrid: return "BadGrid";
    case ErrorKind::DataError: return "DataError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (notably the CLI) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        throw Error(kind, message);
    }
}

} // namespace strikespan
