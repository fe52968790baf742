#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcalc {

// Base class for all library errors so callers can catch qcalc failures in one place.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Source text could not be parsed.  offset is a byte position into the input.
struct parse_error : error {
    std::size_t offset;
    std::string expected;

    parse_error(const std::string& what, std::size_t off, std::string exp)
        : error(what), offset(off), expected(std::move(exp)) {}
};

// Expression evaluation hit an undefined operation (log of a negative number,
// division by zero, ...).  offset points at the offending node's source position.
struct eval_error : error {
    std::size_t offset;

    explicit eval_error(const std::string& what, std::size_t off = 0)
        : error(what), offset(off) {}
};

// A precondition on the mathematical domain failed: point not on the required
// lattice or scale, derivative order too high, endpoint conditions violated,
// no bracketing sign change, and similar.
struct domain_error : error {
    using error::error;
};

// A series or quadrature failed to settle within its budget, in a context where
// no partial-result channel exists.
struct non_convergent : error {
    using error::error;
};

}  // namespace qcalc
