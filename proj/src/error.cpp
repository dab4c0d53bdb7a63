#include "rlhd/error.hpp"

namespace rlhd {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::domain: return "domain";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::degenerate_model: return "degenerate_model";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::invariant: return "invariant";
    }
    return "unknown";
}

}  // namespace rlhd
