#pragma once

#include <stdexcept>
#include <string>

namespace raglab {

enum class ErrorKind {
    invalid_argument,
    parse,
    io,
    validation,
    runtime,
};

/// Library-wide exception. The C API translates the kind into a status code
/// and exposes the message through rag_last_error().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace raglab
