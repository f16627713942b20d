#pragma once

#include <stdexcept>
#include <string>

namespace wwsp {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed documents, broken invariants, out-of-range parameters.
// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Evidence event has probability zero under the model (e.g. a downstream
// False reading combined with an upstream True reading).
class InconsistentEvidenceError : public ValidationError {
public:
    explicit InconsistentEvidenceError(const std::string& what) : ValidationError(what) {}
};

}  // namespace wwsp
