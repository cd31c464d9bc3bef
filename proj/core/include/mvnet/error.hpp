#pragma once

#include <stdexcept>
#include <string>

namespace mvnet {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input validation.
class IndexOutOfRange : public Error { using Error::Error; };
class SelfLoop : public Error { using Error::Error; };
class InvalidProbability : public Error { using Error::Error; };
class InvalidModel : public Error { using Error::Error; };
class AlreadyInfected : public Error { using Error::Error; };

// Numerical engines.
class StateSpaceTooLarge : public Error { using Error::Error; };
class StepTooLarge : public Error { using Error::Error; };
class NotSymmetric : public Error { using Error::Error; };
class NotConverged : public Error { using Error::Error; };
class MultiVirusUnsupported : public Error { using Error::Error; };
class SingularLyapunov : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };

/// Scenario / model file problems. Carries the offending line (0 when not
/// tied to a line) and the dotted field path.
class ConfigError : public Error {
public:
    ConfigError(int line, std::string field, const std::string& what)
        : Error(format(line, field, what)), line_(line), field_(std::move(field)) {}

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(int line, const std::string& field, const std::string& what) {
        std::string s = "config error";
        if (line > 0) s += " at line " + std::to_string(line);
        if (!field.empty()) s += " [" + field + "]";
        return s + ": " + what;
    }

    int line_;
    std::string field_;
};

}  // namespace mvnet
