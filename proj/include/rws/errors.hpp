#ifndef RWS_ERRORS_HPP
#define RWS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rws {

// Invalid or unresolvable configuration (bad family parameters, exponent
// ordering, insufficient wavelet regularity, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Out-of-range query (level beyond the sampled depth, resolution too low).
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Precondition violation on an operation's mathematical domain
// (alpha <= h_low, negative integration order, gamma = 0 inside a tail sum).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A spectrum case split could not be decided because an inexact parameter
// bracket straddles the case boundary.  `boundary()` names the boundary.
class AmbiguityError : public std::runtime_error {
public:
    AmbiguityError(std::string boundary, const std::string& message)
        : std::runtime_error(message), boundary_(std::move(boundary)) {}
    const std::string& boundary() const noexcept { return boundary_; }

private:
    std::string boundary_;
};

} // namespace rws

#endif
