#pragma once

// Off-grid evaluation of map fields.

#include <harmap/core.hpp>
#include <harmap/fourier.hpp>
#include <harmap/grid.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace harmap {

namespace detail {

inline void require_closed_disk(cplx z, const char* what)
{
    if (!(std::abs(z) <= 1.0 + 1e-12))
        throw Error(ErrorKind::domain, std::string(what) + ": point outside the closed disk");
}

// Wrapped angular position: base index and fractional offset in [0, 1).
inline std::pair<int, double> angular_cell(const DiskGrid& grid, double theta)
{
    double t = theta / grid.dtheta();
    t -= grid.ntheta() * std::floor(t / grid.ntheta());
    int a = static_cast<int>(std::floor(t));
    double frac = t - a;
    if (a >= grid.ntheta()) {
        a -= grid.ntheta();
    }
    return {a, frac};
}

} // namespace detail

/// Bilinear interpolation in (r, theta), periodic in theta.
///
/// Radial nodes are the grid rings plus the rim r = 1; below the first ring the segment through
/// the origin joins ring 0 at theta and ring 0 at theta + pi. Exact at nodes.
inline cplx interpolate(const MapField& w, cplx z)
{
    detail::require_closed_disk(z, "interpolate");
    const DiskGrid& g = w.grid;
    const int nt = g.ntheta();
    const double r = std::min(std::abs(z), 1.0);
    const double theta = std::arg(z);

    auto ring_value = [&](int j, double t) {
        const auto [a, frac] = detail::angular_cell(g, t);
        const int b = (a + 1) % nt;
        if (j == g.nr()) {
            return (1.0 - frac) * w.boundary[a] + frac * w.boundary[b];
        }
        return (1.0 - frac) * w.at(j, a) + frac * w.at(j, b);
    };

    const double r0 = g.radius(0);
    if (r < r0) {
        const cplx inner = ring_value(0, theta + pi);
        const cplx outer = ring_value(0, theta);
        const double s = (r + r0) / (2.0 * r0);
        return (1.0 - s) * inner + s * outer;
    }
    const double last = g.radius(g.nr() - 1);
    if (r >= last) {
        const double s = (r - last) / (1.0 - last);
        return (1.0 - s) * ring_value(g.nr() - 1, theta) + s * ring_value(g.nr(), theta);
    }
    const double pos = r * g.nr() - 0.5;
    const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, g.nr() - 2);
    const double s = pos - j;
    return (1.0 - s) * ring_value(j, theta) + s * ring_value(j + 1, theta);
}

/// Value at the origin from the ring means, extrapolated as a quadratic in r^2 through the three
/// innermost rings. Angular modes k != 0 vanish at the origin for a smooth field.
inline cplx origin_value(const MapField& w)
{
    const DiskGrid& g = w.grid;
    const int rings = std::min(3, g.nr());
    cplx out = 0.0;
    for (int q = 0; q < rings; ++q) {
        cplx mean = 0.0;
        for (int a = 0; a < g.ntheta(); ++a)
            mean += w.at(q, a);
        mean /= double(g.ntheta());
        const double sq = g.radius(q) * g.radius(q);
        double l = 1.0;
        for (int p = 0; p < rings; ++p)
            if (p != q) {
                const double sp = g.radius(p) * g.radius(p);
                l *= (0.0 - sp) / (sq - sp);
            }
        out += l * mean;
    }
    return out;
}

/// Smooth interpolant of a map field: trigonometric in theta, four-point Lagrange in r.
///
/// Ring values are continued across the origin as v(-r, theta) = v(r, theta + pi), and the rim
/// values act as the ring r = 1.
class SmoothInterpolant {
public:
    explicit SmoothInterpolant(const MapField& w) : grid_(w.grid)
    {
        const int nr = grid_.nr();
        const int nt = grid_.ntheta();
        if (nr < 2)
            throw Error(ErrorKind::usage, "SmoothInterpolant: need at least 2 rings");
        coeff_.assign(static_cast<std::size_t>(nr + 1) * nt, 0.0);
        std::copy(w.values.begin(), w.values.end(), coeff_.begin());
        std::copy(w.boundary.begin(), w.boundary.end(), coeff_.begin() + grid_.size());
        fourier::transform_rings(coeff_, nt, fourier::Direction::forward);
        for (cplx& c : coeff_)
            c /= double(nt);

        // Radial stencil nodes: two reflected rings, the grid rings, the rim.
        radii_.push_back(-grid_.radius(1));
        radii_.push_back(-grid_.radius(0));
        for (int j = 0; j < nr; ++j)
            radii_.push_back(grid_.radius(j));
        radii_.push_back(1.0);
    }

    const DiskGrid& grid() const noexcept { return grid_; }

    cplx operator()(cplx z) const
    {
        detail::require_closed_disk(z, "SmoothInterpolant");
        const double r = std::min(std::abs(z), 1.0);
        const double theta = std::arg(z);
        const int n = static_cast<int>(radii_.size());

        // Bracket r, then centre a four-point stencil on the bracket.
        int hi = static_cast<int>(std::upper_bound(radii_.begin(), radii_.end(), r) - radii_.begin());
        hi = std::clamp(hi, 1, n - 1);
        const int first = std::clamp(hi - 2, 0, n - 4);

        std::array<cplx, 4> vals;
        for (int q = 0; q < 4; ++q)
            vals[q] = ring_at(first + q, theta);
        cplx out = 0.0;
        for (int q = 0; q < 4; ++q) {
            double l = 1.0;
            for (int p = 0; p < 4; ++p)
                if (p != q)
                    l *= (r - radii_[first + p]) / (radii_[first + q] - radii_[first + p]);
            out += l * vals[q];
        }
        return out;
    }

private:
    // Trigonometric evaluation of stencil ring `node` at angle theta.
    cplx ring_at(int node, double theta) const
    {
        const int nt = grid_.ntheta();
        const bool reflected = node < 2;
        const int ring = reflected ? 1 - node : node - 2;
        const cplx* c = &coeff_[static_cast<std::size_t>(ring) * nt];
        const cplx step = std::polar(1.0, theta);
        cplx pos = 1.0;
        cplx sum = c[0];
        for (int m = 1; m < nt / 2; ++m) {
            pos *= step;
            const double sign = (reflected && (m % 2 == 1)) ? -1.0 : 1.0;
            sum += sign * (c[m] * pos + c[nt - m] * std::conj(pos));
        }
        const int half = nt / 2;
        const double nyq_sign = (reflected && (half % 2 == 1)) ? -1.0 : 1.0;
        sum += nyq_sign * c[half] * std::cos(half * theta);
        return sum;
    }

    DiskGrid grid_;
    std::vector<cplx> coeff_; // [ring][k], ring nr holds the rim
    std::vector<double> radii_;
};

} // namespace harmap
