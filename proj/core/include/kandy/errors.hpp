#ifndef KANDY_ERRORS_HPP
#define KANDY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kandy {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input: DSL documents, canonical strings, rule sources, CSV files.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Canonical-string parse failure; carries the byte offset of the bad token.
class CanonicalParseError : public ParseError {
public:
    CanonicalParseError(const std::string& msg, size_t offset)
        : ParseError(msg + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

/// A set operation or constraint produced an empty atom set, which cannot be
/// grounded. During sample generation this triggers a retry, not an abort.
class EmptyDescriptorError : public Error {
public:
    EmptyDescriptorError() : Error("empty atom descriptor cannot be grounded") {}
    explicit EmptyDescriptorError(const std::string& msg) : Error(msg) {}
};

/// Template rewriting failed (unknown alias, bad pick count, ...).
class ExpansionError : public Error {
public:
    using Error::Error;
};

/// Rule compilation failure (unknown predicate, malformed clause).
class RuleCompileError : public Error {
public:
    using Error::Error;
};

/// Rule evaluation failed in a way that is distinct from a `false` verdict
/// (e.g. the proof depth limit was exceeded).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (e.g. beta = 0 with gamma > 0).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Metric is undefined for the given inputs (absent class, bad time index).
class MetricError : public Error {
public:
    using Error::Error;
};

/// Filesystem/dataset level failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace kandy

#endif
