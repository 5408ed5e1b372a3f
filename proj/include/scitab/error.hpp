#pragma once

#include <stdexcept>
#include <string>

namespace scitab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated a precondition (bad argument, unknown column, unbound placeholder).
class UsageError : public Error {
public:
    using Error::Error;
};

// Input document or file does not match its interchange format.
class FormatError : public Error {
public:
    FormatError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Uniqueness violation (duplicate doc_id, duplicate query id, variant in two groups).
class ConflictError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent configuration (embedder dimension drift, missing model id).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Provider call failed after retries.
class GatewayError : public Error {
public:
    using Error::Error;
};

// Model output could not be validated even after the repair round.
class StructuredOutputError : public Error {
public:
    StructuredOutputError(const std::string& what, std::string raw_text)
        : Error(what), raw_text_(std::move(raw_text)) {}

    const std::string& raw_text() const noexcept { return raw_text_; }

private:
    std::string raw_text_;
};

// Schema inference produced no usable table schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Persisted state is unreadable or from an incompatible version.
class StorageError : public Error {
public:
    using Error::Error;
};

// Optimistic concurrency check failed; client must re-fetch.
class RevisionConflict : public Error {
public:
    RevisionConflict(long expected, long actual)
        : Error("revision conflict: expected " + std::to_string(expected) + ", current " +
                std::to_string(actual)),
          current_(actual) {}

    long current() const noexcept { return current_; }

private:
    long current_;
};

}  // namespace scitab
