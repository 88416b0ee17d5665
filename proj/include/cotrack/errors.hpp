#pragma once

#include <stdexcept>
#include <string>

namespace cotrack {

/// Thrown when an input violates an operation's contract (non-PSD matrix,
/// out-of-range parameter, inconsistent configuration, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a config or trace file cannot be parsed. The message names
/// the offending file, row and column where applicable.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cotrack
