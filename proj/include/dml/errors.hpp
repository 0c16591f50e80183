#ifndef DML_ERRORS_HPP
#define DML_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dml {

/// Base class for all library errors. Carries a short machine-readable tag
/// alongside the human-readable message so the CLI can emit structured errors.
class Error : public std::runtime_error {
public:
    Error(std::string tag, const std::string& message)
        : std::runtime_error(message), tag_(std::move(tag)) {}

    const std::string& tag() const noexcept { return tag_; }

private:
    std::string tag_;
};

struct IngestError : Error {
    explicit IngestError(const std::string& msg) : Error("ingest", msg) {}
};

struct PartitionError : Error {
    explicit PartitionError(const std::string& msg) : Error("partition-infeasible", msg) {}
};

struct EmptyWindowError : Error {
    explicit EmptyWindowError(const std::string& msg) : Error("empty-window", msg) {}
};

struct DegenerateCovariateError : Error {
    explicit DegenerateCovariateError(const std::string& msg) : Error("degenerate-covariate", msg) {}
};

struct UnsupportedFunctionalError : Error {
    explicit UnsupportedFunctionalError(const std::string& msg) : Error("unsupported-functional", msg) {}
};

struct OverlapViolationError : Error {
    explicit OverlapViolationError(const std::string& msg) : Error("overlap-violation", msg) {}
};

struct TrainingDivergedError : Error {
    explicit TrainingDivergedError(const std::string& msg) : Error("training-diverged", msg) {}
};

struct UndefinedScaleError : Error {
    explicit UndefinedScaleError(const std::string& msg) : Error("undefined-scale", msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

/// Wraps any error thrown while processing one cross-fitting fold so the
/// failing fold is visible to the caller.
struct FoldError : Error {
    FoldError(int fold, const std::string& msg)
        : Error("fold", "fold " + std::to_string(fold) + ": " + msg), fold_index(fold) {}
    int fold_index;
};

} // namespace dml

#endif
