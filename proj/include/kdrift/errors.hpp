#pragma once

#include <stdexcept>
#include <string>

namespace kdrift {

// Input violating an operation's preconditions: dimension mismatch,
// non-finite values, unknown labels.
class RejectedInput : public std::invalid_argument {
public:
    explicit RejectedInput(const std::string& what) : std::invalid_argument(what) {}
};

// Too few observations to perform the requested computation.
class InsufficientData : public std::runtime_error {
public:
    explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

// A declarative stream spec that cannot be realized as stated.
class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed serialized input (stream records, config files).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Merging components whose combined weight is zero.
class DegenerateMerge : public std::runtime_error {
public:
    explicit DegenerateMerge(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or unwritable files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kdrift
