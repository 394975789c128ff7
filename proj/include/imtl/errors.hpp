#pragma once

#include <stdexcept>
#include <string>

namespace imtl {

// Inconsistent dimensions, bad keys, invalid arguments. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable files. Maps to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite loss, gradient or parameter. Aborts the run (exit code 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated internal contract, e.g. a stale forward cache.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace imtl
