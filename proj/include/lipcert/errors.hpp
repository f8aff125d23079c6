#pragma once

#include <stdexcept>
#include <string>

namespace lipcert {

// Error taxonomy mirrored by the CLI exit codes: input/validation problems
// exit with 2, budget and not-applicable conditions with 3.
enum class ErrorKind {
    invalid_input,
    shape,
    parse,
    unsupported_norm,
    budget,
    not_applicable,
    internal
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

} // namespace lipcert
