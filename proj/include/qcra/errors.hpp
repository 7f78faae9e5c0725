#pragma once

#include <stdexcept>
#include <string>

namespace qcra {

/// Raised for arguments outside an operation's mathematical domain
/// (non-finite inputs, probabilities outside (0,1), mismatched widths).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a documented precondition of a builder is violated, e.g. a
/// non-integer LGD handed to the weighted-sum objective. The message names
/// the offending item.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace qcra
