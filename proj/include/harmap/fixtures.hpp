#pragma once

// Closed-form test maps.

#include <harmap/core.hpp>
#include <harmap/grid.hpp>

#include <cmath>
#include <iostream>

namespace harmap {

/// w(z) = |z|^alpha z. Quasiconformal with K = 1 + alpha; for alpha > 1 its inverse fails to be
/// Lipschitz at the origin.
inline MapField example_map_alpha(double alpha, const DiskGrid& grid)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw Error(ErrorKind::input, "example_map_alpha: alpha must be positive");
    if (alpha <= 1.0)
        std::cerr << "warning: example_map_alpha: alpha = " << alpha
                  << " lies outside the range alpha > 1 of the counterexample\n";
    return sample(grid, [alpha](cplx z) { return std::pow(std::abs(z), alpha) * z; });
}

/// Exact Wirtinger derivatives and Laplacian of |z|^alpha z.
struct AlphaMapJet {
    cplx dz, dzbar, laplacian;
};

inline AlphaMapJet example_map_alpha_jet(double alpha, cplx z)
{
    const double r = std::abs(z);
    if (r == 0.0)
        return {0.0, 0.0, 0.0};
    const double ra = std::pow(r, alpha);
    return {(1.0 + 0.5 * alpha) * ra, 0.5 * alpha * ra * z / std::conj(z),
            alpha * (2.0 + alpha) * ra / std::conj(z)};
}

} // namespace harmap
