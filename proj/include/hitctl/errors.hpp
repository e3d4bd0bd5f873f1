#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hitctl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CertificateInfeasible : public Error {
public:
    using Error::Error;
};

class InfeasibleAction : public Error {
public:
    using Error::Error;
};

class TooLarge : public Error {
public:
    using Error::Error;
};

class SolveFailed : public Error {
public:
    using Error::Error;
};

class MissingTargetDynamics : public Error {
public:
    using Error::Error;
};

class PolicyUndefined : public Error {
public:
    using Error::Error;
};

class ExcursionStalled : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Raised when a model fails validation; carries every violation found.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

} // namespace hitctl
