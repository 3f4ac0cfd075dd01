#pragma once

#include <stdexcept>
#include <string>

namespace cuhyp {

// Raised for malformed arguments: non-finite entries, zero directions,
// points outside a required domain.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A certificate was handed to an operation that needs it to have passed.
class InvalidCertificate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Graph-transform parameters failed admissibility, or the iteration
// stopped contracting.
class ParamsViolated : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A single graph-transform step could not invert G at some node.
class StepFailed : public std::runtime_error {
public:
    StepFailed(const std::string& what, int node, double residual)
        : std::runtime_error(what), node_(node), residual_(residual) {}
    int node() const noexcept { return node_; }
    double residual() const noexcept { return residual_; }

private:
    int node_;
    double residual_;
};

// The sampled C^1 size of the nonlinear part exceeds the requested delta.
class DeltaBudgetExceeded : public std::runtime_error {
public:
    DeltaBudgetExceeded(const std::string& what, double measured, double suggested_radius)
        : std::runtime_error(what), measured_(measured), suggested_radius_(suggested_radius) {}
    double measured() const noexcept { return measured_; }
    double suggested_radius() const noexcept { return suggested_radius_; }

private:
    double measured_;
    double suggested_radius_;
};

// A numerical precondition (e.g. image inside the target polydisc) failed.
class PreconditionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed map specification or configuration file.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cuhyp
