#pragma once

#include <stdexcept>
#include <string>

namespace qclust {

/// Invalid configuration value (qubit counts, mapper sizes, config-file keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an argument that violates an operation's precondition.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file was readable but its layout is wrong (e.g. a CSV header mismatch).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qclust
