#pragma once

#include <stdexcept>
#include <string>

namespace vtn {

/// Shape or index mismatch between operands.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A dense object would exceed the configured entry guard.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Non-finite values or a failed factorization.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed CSV, model file or configuration.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vtn
