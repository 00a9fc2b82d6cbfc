#include "nq/errors.hpp"

namespace nq {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidDomain: return "InvalidDomain";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::NonsmoothAtZero: return "NonsmoothAtZero";
        case ErrorKind::OutsideW: return "OutsideW";
        case ErrorKind::DegenerateWeight: return "DegenerateWeight";
        case ErrorKind::ZeroDenominator: return "ZeroDenominator";
        case ErrorKind::NotInAB: return "NotInAB";
        case ErrorKind::NotOnNehari: return "NotOnNehari";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NoIntersection: return "NoIntersection";
        case ErrorKind::DegenerateTangency: return "DegenerateTangency";
        case ErrorKind::BranchEmpty: return "BranchEmpty";
        case ErrorKind::SignViolation: return "SignViolation";
        case ErrorKind::EmptySet: return "EmptySet";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace nq
