#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace context_drift {

// Root of every error the library raises on purpose. Standard exceptions
// (std::invalid_argument for bad parameters, std::bad_alloc, ...) pass
// through untouched.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownEntity : public Error {
public:
    using Error::Error;
};

class PoolExhausted : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IncompleteMapping : public Error {
public:
    using Error::Error;
};

class EmptyStory : public Error {
public:
    using Error::Error;
};

class MalformedHistory : public Error {
public:
    using Error::Error;
};

class UnparseableContext : public Error {
public:
    using Error::Error;
};

class MissingResult : public Error {
public:
    using Error::Error;
};

class DuplicateResult : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Model backend failures. The session engine records ModelError subclasses
// against the question being asked and keeps going, except for
// ScriptExhausted and AuthRequired which mean the run itself is misconfigured.
class ModelError : public Error {
public:
    using Error::Error;
};

class TransportError : public ModelError {
public:
    using ModelError::ModelError;
};

class RemoteRejected : public ModelError {
public:
    RemoteRejected(int status, std::string body)
        : ModelError("endpoint rejected request with HTTP " + std::to_string(status) + ": " + body),
          status_(status),
          body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

class AuthRequired : public RemoteRejected {
public:
    using RemoteRejected::RemoteRejected;
};

class BudgetRejected : public RemoteRejected {
public:
    using RemoteRejected::RemoteRejected;
};

class ScriptExhausted : public ModelError {
public:
    using ModelError::ModelError;
};

}  // namespace context_drift
