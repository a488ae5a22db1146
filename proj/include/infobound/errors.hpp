#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infobound {

/// Failure categories raised by the numerical core. The name of the kind is
/// part of every message so command-line callers can report it verbatim.
enum class ErrorKind {
    OutOfDomain,
    DegeneratePmf,
    ScoreInconsistent,
    DimensionMismatch,
    NotPsd,
    SingularInformation,
    IllConditionedGram,
    PosteriorUnderflow,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace infobound
