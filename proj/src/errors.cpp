#include "infobound/errors.hpp"

namespace infobound {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::DegeneratePmf: return "DegeneratePmf";
        case ErrorKind::ScoreInconsistent: return "ScoreInconsistent";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NotPsd: return "NotPsd";
        case ErrorKind::SingularInformation: return "SingularInformation";
        case ErrorKind::IllConditionedGram: return "IllConditionedGram";
        case ErrorKind::PosteriorUnderflow: return "PosteriorUnderflow";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace infobound
