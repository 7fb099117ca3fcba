#pragma once

#include <stdexcept>
#include <string>

namespace dwitt {

enum class ErrorCode {
    Usage = 1,
    Parse,
    ArityMismatch,
    ShapeMismatch,
    NotDivisible,
    NotInImage,
    InvalidLift,
    FrobeniusMismatch,
    NotSaturated,
    IterationLimit,
    BudgetExceeded,
    SpanOverflow,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

}  // namespace dwitt
