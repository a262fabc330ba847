// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grag {

// Error classes surfaced by the library. The CLI maps these to a
// machine-greppable "error[<Class>]" prefix; the service maps them to
// HTTP statuses.
enum class ErrorCode {
    EmptyGraph,
    DanglingEdge,
    DimMismatch,
    DuplicateEdge,
    DuplicateNode,
    UnknownNode,
    DuplicateFragment,
    EmptyIndex,
    CorruptIndex,
    ParseError,
    EmptyText,
    NonFiniteInput,
    BadTemplate,
    AuthError,
    TimeoutError,
    RateLimited,
    MalformedResponse,
    EmptyInput,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace grag
