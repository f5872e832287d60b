#pragma once

#include <stdexcept>
#include <string>

namespace audsem {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A remote or scripted backend call failed. Retryable errors are timeouts,
// connection failures and 5xx replies.
class BackendError : public Error {
public:
    BackendError(const std::string& what, bool retryable)
        : Error(what), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

// Generator output failed schema validation. category() is a stable
// kebab-case code such as "thinking-too-short".
class ValidationError : public Error {
public:
    ValidationError(std::string category, const std::string& detail)
        : Error(category + ": " + detail), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

}  // namespace audsem
