#pragma once

// Kernels of the unit disk and its Moebius automorphisms.
//
// Wirtinger convention used across the library:
//   d/dz = (d/dx - i d/dy) / 2,   d/dzbar = (d/dx + i d/dy) / 2,   Laplacian = 4 d/dz d/dzbar.

#include <harmap/core.hpp>

#include <cmath>

namespace harmap::geometry {

/// Inputs closer than this to the kernel diagonal are rejected.
inline constexpr double singularity_guard = 1e-13;

namespace detail {

inline void require_open_disk(cplx z, const char* who)
{
    if (!(std::abs(z) < 1.0))
        throw Error(ErrorKind::domain, std::string(who) + ": point outside the open unit disk");
}

inline void require_off_diagonal(cplx z, cplx w, const char* who)
{
    if (std::abs(z - w) < singularity_guard)
        throw Error(ErrorKind::singularity, std::string(who) + ": z coincides with w");
}

} // namespace detail

/// P(z, e^{i theta}) = (1 - |z|^2) / |z - e^{i theta}|^2.
inline double poisson_kernel(cplx z, double theta)
{
    detail::require_open_disk(z, "poisson_kernel");
    return (1.0 - abs2(z)) / abs2(z - std::polar(1.0, theta));
}

/// Green function of the disk, G(z, w) = (1/2pi) log |(1 - z conj(w)) / (z - w)|.
inline double green(cplx z, cplx w)
{
    detail::require_open_disk(z, "green");
    detail::require_open_disk(w, "green");
    detail::require_off_diagonal(z, w, "green");
    return std::log(std::abs(1.0 - z * std::conj(w)) / std::abs(z - w)) / two_pi;
}

/// Unchecked kernel used inside quadrature loops.
inline double green_unchecked(cplx z, cplx w) noexcept
{
    return 0.5 * std::log(abs2(1.0 - z * std::conj(w)) / abs2(z - w)) / two_pi;
}

/// dG/dz = (1/4pi) (1 - |w|^2) / ((z - w)(z conj(w) - 1)).
inline cplx green_dz(cplx z, cplx w)
{
    detail::require_open_disk(z, "green_dz");
    detail::require_open_disk(w, "green_dz");
    detail::require_off_diagonal(z, w, "green_dz");
    return (1.0 - abs2(w)) / ((z - w) * (z * std::conj(w) - 1.0)) / (4.0 * pi);
}

/// dG/dzbar; G is real so this is conj(dG/dz), equivalently green_dz(conj z, conj w).
inline cplx green_dzbar(cplx z, cplx w)
{
    return green_dz(std::conj(z), std::conj(w));
}

/// Moebius self-map of the disk in one of two normal forms:
///   to_zero:   p(w) = (w - a) / (1 - w conj(a)),   p(a) = 0
///   from_zero: q(z) = (z + a) / (1 + z conj(a)),   q(0) = a
class DiskAutomorphism {
public:
    enum class Form { to_zero, from_zero };

    DiskAutomorphism(cplx center, Form form) : center_(center), form_(form)
    {
        if (!(std::abs(center) < 1.0))
            throw Error(ErrorKind::domain, "DiskAutomorphism: center must satisfy |a| < 1");
    }

    static DiskAutomorphism to_zero(cplx center) { return {center, Form::to_zero}; }
    static DiskAutomorphism from_zero(cplx center) { return {center, Form::from_zero}; }

    cplx center() const noexcept { return center_; }
    Form form() const noexcept { return form_; }

    /// The other normal form with the same center; it is the exact inverse.
    DiskAutomorphism inverse() const noexcept
    {
        return {center_, form_ == Form::to_zero ? Form::from_zero : Form::to_zero};
    }

    cplx operator()(cplx z) const
    {
        if (std::abs(z) > 1.0 + 1e-12)
            throw Error(ErrorKind::domain, "DiskAutomorphism: |z| > 1");
        const double s = sign();
        return (z - s * center_) / (1.0 - s * z * std::conj(center_));
    }

    /// Exact complex derivative of order 1 or 2.
    cplx derivative(cplx z, int order) const
    {
        if (order != 1 && order != 2)
            throw Error(ErrorKind::usage, "DiskAutomorphism::derivative: order must be 1 or 2");
        if (std::abs(z) > 1.0 + 1e-12)
            throw Error(ErrorKind::domain, "DiskAutomorphism: |z| > 1");
        const double s = sign();
        const cplx a_bar = std::conj(center_);
        const cplx denom = 1.0 - s * z * a_bar;
        const double scale = 1.0 - abs2(center_);
        if (order == 1)
            return scale / (denom * denom);
        return 2.0 * s * a_bar * scale / (denom * denom * denom);
    }

private:
    // +1 for to_zero, -1 for from_zero: both forms are (z - s a)/(1 - s z conj(a)).
    double sign() const noexcept { return form_ == Form::to_zero ? 1.0 : -1.0; }

    cplx center_;
    Form form_;
};

inline cplx automorphism_apply(const DiskAutomorphism& m, cplx z) { return m(z); }

inline cplx automorphism_deriv(const DiskAutomorphism& m, cplx z, int order)
{
    return m.derivative(z, order);
}

} // namespace harmap::geometry
