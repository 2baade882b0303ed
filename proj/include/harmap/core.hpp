#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace harmap {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx imag_unit{0.0, 1.0};

/// Failure categories. The CLI maps these onto process exit statuses.
enum class ErrorKind {
    domain,        // argument outside the closed/open unit disk
    singularity,   // kernel evaluated on its diagonal
    usage,         // argument outside an operation's admissible set
    input,         // user-supplied data violates an invariant
    divergence,    // fixed-point iteration did not converge
    precondition,  // field does not satisfy a normalization requirement
    invalid_map,   // field is not a self-map of the disk where required
    io
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::singularity: return "singularity error";
    case ErrorKind::usage: return "usage error";
    case ErrorKind::input: return "input error";
    case ErrorKind::divergence: return "divergence error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::invalid_map: return "invalid map error";
    case ErrorKind::io: return "io error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what)
    { }

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the category prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

inline double abs2(cplx z) noexcept { return std::norm(z); }

} // namespace harmap
