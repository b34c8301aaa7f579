#include "ratesculpt/error.hpp"

namespace ratesculpt {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnknownWord: return "UnknownWord";
        case ErrorCode::NoPitchDetected: return "NoPitchDetected";
        case ErrorCode::DegenerateClass: return "DegenerateClass";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::NoVariation: return "NoVariation";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Conflict: return "Conflict";
        case ErrorCode::Completed: return "Completed";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ExternalService: return "ExternalService";
    }
    return "Unknown";
}

}  // namespace ratesculpt
