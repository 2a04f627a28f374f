#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace smms {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A finite-difference stencil, sample or evaluation point left the declared domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The metric is not positive definite (smallest eigenvalue below the floor) at `point`.
class SingularMetric : public Error {
public:
    SingularMetric(const std::string& what, std::vector<double> point, double min_eigenvalue)
        : Error(what), point_(std::move(point)), min_eigenvalue_(min_eigenvalue) {}

    const std::vector<double>& point() const noexcept { return point_; }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    std::vector<double> point_;
    double min_eigenvalue_;
};

class RankMismatch : public Error {
public:
    using Error::Error;
};

class NonIntegerM : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class UnrealizableFiber : public Error {
public:
    using Error::Error;
};

class NonPositiveWarp : public Error {
public:
    using Error::Error;
};

/// A family parameter record violates one of the family's stated constraints.
class ParamConstraintViolation : public Error {
public:
    ParamConstraintViolation(std::string family, std::string clause)
        : Error(family + ": parameter constraint violated: " + clause),
          family_(std::move(family)),
          clause_(std::move(clause)) {}

    const std::string& family() const noexcept { return family_; }
    const std::string& clause() const noexcept { return clause_; }

private:
    std::string family_;
    std::string clause_;
};

class InvalidSMMS : public Error {
public:
    using Error::Error;
};

class PreconditionFailed : public Error {
public:
    using Error::Error;
};

class StepSizeUnderflow : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    using Error::Error;
};

class InvalidProblem : public Error {
public:
    using Error::Error;
};

}  // namespace smms
