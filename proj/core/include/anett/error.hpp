#pragma once

#include <stdexcept>
#include <string>

namespace anett {

/// Shapes of two operands do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain of a function (negative counts, log of zero, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested configuration is valid in principle but not implemented.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed configuration or checkpoint content.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_same_size(long a, long b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": size mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

} // namespace detail
} // namespace anett
