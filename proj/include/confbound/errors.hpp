#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace confbound {

// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed inputs: shape mismatches, bad CSV, invalid configuration.
struct InputError : Error {
    using Error::Error;
};

// Parameter outside the declared domain box. Carries the violated bound.
struct DomainError : Error {
    DomainError(const std::string& msg, int index, double value, double lo, double hi)
        : Error(msg), index(index), value(value), lo(lo), hi(hi) {}
    explicit DomainError(const std::string& msg) : Error(msg), index(-1), value(0), lo(0), hi(0) {}
    int index;
    double value, lo, hi;
};

// Covariance not symmetric positive-definite.
struct CovarianceError : Error {
    using Error::Error;
};

// Non-finite value produced while propagating derivatives.
struct PropagationError : Error {
    PropagationError(const std::string& msg, int component) : Error(msg), component(component) {}
    int component;
};

// ODE or quadrature failure. Carries the last state reached.
struct IntegrationError : Error {
    IntegrationError(const std::string& msg, double t_last, std::vector<double> y_last)
        : Error(msg), t_last(t_last), y_last(std::move(y_last)) {}
    explicit IntegrationError(const std::string& msg) : Error(msg), t_last(0) {}
    double t_last;
    std::vector<double> y_last;
};

// Fisher metric singular (local structural non-identifiability).
struct IdentifiabilityError : Error {
    using Error::Error;
};

// Confidence region unbounded in a direction: the likelihood-ratio threshold
// is never crossed along the searched ray.
struct PracticalNonIdentifiability : Error {
    PracticalNonIdentifiability(const std::string& msg, std::vector<double> direction)
        : Error(msg), direction(std::move(direction)) {}
    std::vector<double> direction;
};

// Seed ray left the parameter domain box before crossing the threshold.
struct DomainTruncation : Error {
    DomainTruncation(const std::string& msg, double radius, double lr_at_box)
        : Error(msg), radius(radius), lr_at_box(lr_at_box) {}
    double radius;
    double lr_at_box;
};

// The gradient vanished away from the MLE (multimodal / disconnected level set).
struct GradientSingularity : Error {
    using Error::Error;
};

// Operation requires a closed curve or watertight mesh.
struct TopologyError : Error {
    using Error::Error;
};

// A point with higher likelihood than the supplied MLE was encountered.
struct BetterPointFound : Error {
    BetterPointFound(const std::string& msg, std::vector<double> theta)
        : Error(msg), theta(std::move(theta)) {}
    std::vector<double> theta;
};

// Fit did not converge within the iteration budget.
struct NonConvergence : Error {
    using Error::Error;
};

}  // namespace confbound
