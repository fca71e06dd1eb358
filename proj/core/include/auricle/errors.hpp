#pragma once

#include <stdexcept>
#include <string>

namespace auricle {

// Base class for all errors raised by the library. `category()` is the short
// machine-readable tag the CLI prints as `error[<category>]: <message>`.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

// Malformed input file (wav header, manifest line, checkpoint container).
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse", m) {}
};

// Input is well-formed but uses an encoding we do not handle.
struct UnsupportedFormatError : Error {
    explicit UnsupportedFormatError(const std::string& m) : Error("unsupported-format", m) {}
};

// Invalid configuration value or key.
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};

// Tensor/layer shape disagreement.
struct ShapeError : Error {
    explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

// Index outside the valid range.
struct BoundsError : Error {
    explicit BoundsError(const std::string& m) : Error("bounds", m) {}
};

// Filesystem failure (open, read, write, rename).
struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io", m) {}
};

// Numerical failure during training (non-finite loss or gradient).
struct TrainingError : Error {
    explicit TrainingError(const std::string& m) : Error("training", m) {}
};

// Labeled-data problem (label out of range, missing label).
struct ManifestError : Error {
    explicit ManifestError(const std::string& m) : Error("manifest", m) {}
};

// Metric inputs disagree (length mismatch, empty set).
struct MetricError : Error {
    explicit MetricError(const std::string& m) : Error("metric", m) {}
};

// Invalid synthetic-corpus specification.
struct SpecError : Error {
    explicit SpecError(const std::string& m) : Error("spec", m) {}
};

// Not enough data to honor the requested batch size.
struct CorpusError : Error {
    explicit CorpusError(const std::string& m) : Error("corpus", m) {}
};

// Input that makes the requested operation meaningless (e.g. zero-norm vector
// passed to cosine similarity).
struct DegenerateInputError : Error {
    explicit DegenerateInputError(const std::string& m) : Error("degenerate-input", m) {}
};

}  // namespace auricle
