#include "dwitt/error.hpp"

namespace dwitt {

const char* error_code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::NotInImage: return "NotInImage";
    case ErrorCode::InvalidLift: return "InvalidLift";
    case ErrorCode::FrobeniusMismatch: return "FrobeniusMismatch";
    case ErrorCode::NotSaturated: return "NotSaturated";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::SpanOverflow: return "SpanOverflow";
    }
    return "Unknown";
}

}  // namespace dwitt
