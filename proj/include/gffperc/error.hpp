#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gffperc {

enum class ErrorCode {
    ParseError,
    SelfLoop,
    DuplicateEdge,
    Disconnected,
    TooSmall,
    PreconditionError,
    GenerationFailed,
    BadParams,
    SolverFailure,
    TooLarge,
    FactorizationFailure,
    DimensionMismatch,
    BadK,
    RouteMismatch,
    InsufficientData,
    EmptyInput,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` identifies
// the failure class, `what()` carries the detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace gffperc
