#pragma once

#include <stdexcept>
#include <string>

namespace fastgcrnn {

// Incompatible matrix/vector shapes; message names both shapes.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed or inconsistent input data (files, records, graph wiring).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or violated numeric preconditions.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and stream failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse, e.g. backward without a matching forward cache.
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace fastgcrnn
