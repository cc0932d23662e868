#include "disent/error.hpp"

namespace disent {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid input";
        case ErrorKind::Shape: return "shape error";
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::InvalidConfig: return "invalid config";
        case ErrorKind::Format: return "format error";
        case ErrorKind::Consistency: return "consistency error";
        case ErrorKind::Mapping: return "mapping error";
        case ErrorKind::TrainingDiverged: return "training diverged";
        case ErrorKind::Io: return "i/o error";
        case ErrorKind::Validation: return "validation error";
    }
    return "error";
}

}  // namespace disent
