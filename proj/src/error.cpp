// SPDX-License-Identifier: Apache-2.0
#include "grag/error.hpp"

namespace grag {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyGraph: return "EmptyGraph";
        case ErrorCode::DanglingEdge: return "DanglingEdge";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::DuplicateEdge: return "DuplicateEdge";
        case ErrorCode::DuplicateNode: return "DuplicateNode";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::DuplicateFragment: return "DuplicateFragment";
        case ErrorCode::EmptyIndex: return "EmptyIndex";
        case ErrorCode::CorruptIndex: return "CorruptIndex";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::BadTemplate: return "BadTemplate";
        case ErrorCode::AuthError: return "AuthError";
        case ErrorCode::TimeoutError: return "TimeoutError";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace grag
