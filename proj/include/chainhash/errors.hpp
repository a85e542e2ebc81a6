#pragma once

#include <stdexcept>
#include <string>

namespace chainhash {

// Malformed or out-of-contract input: bad table size, duplicate questions,
// impossible configuration. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A chain artifact whose stored assignments disagree with recomputation.
class IntegrityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Probability estimation was asked for a mode the endpoint cannot serve.
class UnsupportedModeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace chainhash
