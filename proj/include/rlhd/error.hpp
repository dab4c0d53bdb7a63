#pragma once

#include <stdexcept>
#include <string>

namespace rlhd {

enum class ErrorKind {
    usage,
    domain,
    configuration,
    precondition,
    unsupported,
    degenerate_model,
    evaluation,
    protocol,
    invariant,
};

/// Base of every error raised by the library. The kind decides the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define RLHD_DEFINE_ERROR(Name, Kind)                                       \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& message) : Error(Kind, message) {} \
    };

RLHD_DEFINE_ERROR(UsageError, ErrorKind::usage)
RLHD_DEFINE_ERROR(DomainError, ErrorKind::domain)
RLHD_DEFINE_ERROR(ConfigurationError, ErrorKind::configuration)
RLHD_DEFINE_ERROR(PreconditionError, ErrorKind::precondition)
RLHD_DEFINE_ERROR(UnsupportedError, ErrorKind::unsupported)
RLHD_DEFINE_ERROR(DegenerateModelError, ErrorKind::degenerate_model)
RLHD_DEFINE_ERROR(EvaluationError, ErrorKind::evaluation)
RLHD_DEFINE_ERROR(ProtocolError, ErrorKind::protocol)
RLHD_DEFINE_ERROR(InvariantError, ErrorKind::invariant)

#undef RLHD_DEFINE_ERROR

/// Process exit codes: 0 success, 2 usage, 3 evaluation failure, 4 invariant violation.
constexpr int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::degenerate_model:
    case ErrorKind::evaluation:
    case ErrorKind::protocol:
        return 3;
    case ErrorKind::invariant:
        return 4;
    default:
        return 2;
    }
}

const char* to_string(ErrorKind kind) noexcept;

}  // namespace rlhd
