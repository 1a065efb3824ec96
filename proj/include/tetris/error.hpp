#pragma once

#include <stdexcept>
#include <string>

namespace tetris {

// Error classes double as CLI exit codes.
enum class ErrorClass : int {
    config = 1,
    ingestion = 2,
    model = 3,
    numerical = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& message)
        : std::runtime_error(message), cls_(cls) {}

    ErrorClass error_class() const noexcept { return cls_; }
    int exit_code() const noexcept { return static_cast<int>(cls_); }

private:
    ErrorClass cls_;
};

/// Bad parameters, violated preconditions, malformed configuration.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message)
        : Error(ErrorClass::config, message) {}
};

/// Malformed or unreadable input files.
class IngestError : public Error {
public:
    explicit IngestError(const std::string& message)
        : Error(ErrorClass::ingestion, message) {}
};

/// A signal-model description that violates its own conditions,
/// e.g. a non-positive harmonic amplitude.
class ModelViolation : public Error {
public:
    explicit ModelViolation(const std::string& message)
        : Error(ErrorClass::model, message) {}
};

/// A numerical stage failed (degenerate ridge, singular system, ...).
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error(ErrorClass::numerical, stage + ": " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace tetris
