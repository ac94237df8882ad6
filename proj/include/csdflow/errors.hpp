#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csdflow {

enum class ErrorKind {
    TooFewNodes,
    AxisViolation,
    SelfIntersection,
    PoleSlopeError,
    BadParameter,
    DegenerateGeometry,
    OutOfRange,
    InvalidConfig,
    TooFewSnapshots,
    TooFewExperiments,
    WindowInvalid,
    ConfigParse,
    DataFormat,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this exception; `kind()` lets
// callers (and the CLI exit-code mapping) dispatch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::TooFewNodes: return "TooFewNodes";
    case ErrorKind::AxisViolation: return "AxisViolation";
    case ErrorKind::SelfIntersection: return "SelfIntersection";
    case ErrorKind::PoleSlopeError: return "PoleSlopeError";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::TooFewSnapshots: return "TooFewSnapshots";
    case ErrorKind::TooFewExperiments: return "TooFewExperiments";
    case ErrorKind::WindowInvalid: return "WindowInvalid";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::DataFormat: return "DataFormat";
    }
    return "Unknown";
}

} // namespace csdflow
