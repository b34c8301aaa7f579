#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ratesculpt {

enum class ErrorCode {
    InvalidInput,
    ParseError,
    UnknownWord,
    NoPitchDetected,
    DegenerateClass,
    InsufficientData,
    NoVariation,
    NotFound,
    Conflict,
    Completed,
    IoError,
    ExternalService,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Carries the offending label so callers can report which class was empty.
class DegenerateClassError : public Error {
public:
    explicit DegenerateClassError(std::string label)
        : Error(ErrorCode::DegenerateClass, "no trials for response class '" + label + "'"),
          label_(std::move(label)) {}

    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

class ParseErrorAt : public Error {
public:
    ParseErrorAt(std::size_t position, const std::string& what)
        : Error(ErrorCode::ParseError, what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
    if (!condition) throw Error(ErrorCode::InvalidInput, what);
}

}  // namespace ratesculpt
