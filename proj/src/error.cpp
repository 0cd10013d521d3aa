#include "pbrc/error.hpp"

namespace pbrc {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension error";
        case ErrorKind::Convergence: return "convergence error";
        case ErrorKind::DegenerateMatrix: return "degenerate-matrix error";
        case ErrorKind::Singular: return "singularity error";
        case ErrorKind::EmptyInput: return "empty-input error";
        case ErrorKind::Schema: return "schema error";
        case ErrorKind::Integrity: return "integrity error";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::UnknownLabel: return "unknown-label error";
        case ErrorKind::DegenerateTask: return "degenerate-task error";
        case ErrorKind::Io: return "I/O error";
        case ErrorKind::Config: return "configuration error";
    }
    return "error";
}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace pbrc
