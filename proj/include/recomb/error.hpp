#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recomb {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input: bad partition text, mismatched sizes, non-normalized weights.
class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation"; }
};

/// A configured cap (state count, table size) was exceeded.
class ResourceError : public Error {
public:
    ResourceError(const std::string& what, std::size_t partial_count)
        : Error(what), partial_(partial_count) {}
    std::size_t partial_count() const noexcept { return partial_; }
    const char* kind() const noexcept override { return "resource"; }

private:
    std::size_t partial_;
};

/// The model is outside the regime an analysis applies to (rho of the coarsest partition is 1).
class DegenerateModelError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "degenerate"; }
};

/// An identity that must hold exactly was found violated. Always a bug.
class ConsistencyError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "consistency"; }
};

/// A hitting functional whose defining series diverges was requested.
class DivergenceError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "divergence"; }
};

}  // namespace recomb
