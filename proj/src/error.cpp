#include "lawq/error.hpp"

namespace lawq {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::InvalidBits: return "InvalidBits";
        case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::InvalidLabel: return "InvalidLabel";
        case ErrorCode::DegenerateBatch: return "DegenerateBatch";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptRecord: return "CorruptRecord";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::BadValue: return "BadValue";
        case ErrorCode::MissingRequired: return "MissingRequired";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace lawq
