#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace instrank {

enum class ErrorKind {
    IoError,
    FormatError,
    NoMatch,
    EmptyCorpus,
    UnknownPaper,
    EmptySeries,
    InvalidAlpha,
    SeriesTooShort,
    FitDiverged,
    MissingTruth,
    EmptyGroundTruth,
    DegenerateLabels,
    EmptyGraph,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::NoMatch: return "NoMatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::UnknownPaper: return "UnknownPaper";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::FitDiverged: return "FitDiverged";
    case ErrorKind::MissingTruth: return "MissingTruth";
    case ErrorKind::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto a stable exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// 0 success, 2 I/O, 3 format, 4 missing truth, 5 model error.
constexpr int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::IoError: return 2;
    case ErrorKind::FormatError: return 3;
    case ErrorKind::MissingTruth: return 4;
    default: return 5;
    }
}

}  // namespace instrank
