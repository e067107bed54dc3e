#pragma once

#include <stdexcept>
#include <string>

namespace svir {

/// Thrown when an argument violates an operation's preconditions.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a formula is evaluated outside its mathematical domain.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when an integration or root-finding step loses validity
/// (non-finite values, states below tolerance, non-convergence of a
/// bracketed search).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace svir
