#pragma once

#include <stdexcept>
#include <string>

namespace bsimplex {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A numerical routine could not reach its stated accuracy (series cap,
// quadrature refinement limit, root bracket failure).
class AccuracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Result is not representable in double precision.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// Estimation could not proceed (too few or degenerate observations).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file or document.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void domain_fail(const char* where, const std::string& what)
{
    throw DomainError(std::string(where) + ": " + what);
}

}  // namespace detail

}  // namespace bsimplex
