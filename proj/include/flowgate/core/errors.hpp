#pragma once

#include <stdexcept>
#include <string>

namespace flowgate {

// Violated caller contract: wrong flow direction tag, mismatched shapes.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The flow solver produced a non-finite objective.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable files and data that violates a format contract.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void throw_shape_mismatch(const char* what)
{
    throw ContractError(std::string(what) + ": shape mismatch");
}

} // namespace detail

} // namespace flowgate
