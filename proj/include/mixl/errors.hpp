#pragma once

#include <stdexcept>
#include <string>

namespace mixl {

// Malformed input: bad config values, bad dataset files, dimension mismatches.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure during estimation: factorization breakdown, non-finite state.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure: unreadable input, unwritable output.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixl
