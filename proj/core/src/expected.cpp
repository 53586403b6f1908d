#include "hjblab/expected.hpp"

#include <sstream>

namespace hjb {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::BlowUp: return "blow-up";
        case ErrorCode::TailNotCertifiable: return "tail-not-certifiable";
        case ErrorCode::NonConvex: return "non-convex";
        case ErrorCode::Stability: return "stability";
        case ErrorCode::BoundaryMargin: return "boundary-margin";
        case ErrorCode::WindowTooSmall: return "window-too-small";
        case ErrorCode::OutOfDomain: return "out-of-domain";
        case ErrorCode::NotConverged: return "not-converged";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

std::string Error::describe() const {
    std::ostringstream os;
    os << to_string(code) << ": " << message;
    if (blowup_time) os << " (blow-up time " << *blowup_time << ")";
    return os.str();
}

}  // namespace hjb
