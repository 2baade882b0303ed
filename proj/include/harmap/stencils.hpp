#pragma once

// Derivatives of fields sampled on a DiskGrid.
//
// Angular derivatives are spectral (per-ring DFT). Radial derivatives use five-point stencils;
// points at negative radius are the mirrored ring read at theta + pi. Rim values are not used:
// a computed field carries its discretisation error on the interior rings only, and mixing in
// exact rim data would turn an O(h^2) value error into an O(1) second difference.

#include <harmap/core.hpp>
#include <harmap/fourier.hpp>
#include <harmap/grid.hpp>

#include <algorithm>
#include <array>
#include <span>
#include <tuple>
#include <vector>

namespace harmap {

namespace detail {

/// Finite-difference weights for derivatives 0..max_order at x0 on arbitrary nodes (Fornberg).
inline std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                         int max_order)
{
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

} // namespace detail

/// dr, dtheta, drr, dthetatheta of a node field.
struct PolarDerivatives {
    NodeField dr, dt, drr, dtt;
};

/// Spectral angular derivatives of order 1 and 2, ring by ring.
inline std::pair<NodeField, NodeField> angular_derivatives(const DiskGrid& grid,
                                                           std::span<const cplx> values)
{
    const int n = grid.ntheta();
    NodeField spec(values.begin(), values.end());
    fourier::transform_rings(spec, n, fourier::Direction::forward);
    NodeField d1(spec.size()), d2(spec.size());
    const double inv_n = 1.0 / n;
    for (int j = 0; j < grid.nr(); ++j) {
        for (int k = 0; k < n; ++k) {
            const int m = fourier::wavenumber(k, n);
            const cplx c = spec[grid.index(j, k)] * inv_n;
            d1[grid.index(j, k)] = (2 * m == n) ? cplx(0.0) : imag_unit * double(m) * c;
            d2[grid.index(j, k)] = -double(m) * double(m) * c;
        }
    }
    fourier::transform_rings(d1, n, fourier::Direction::backward);
    fourier::transform_rings(d2, n, fourier::Direction::backward);
    return {std::move(d1), std::move(d2)};
}

/// Radial derivatives of order 1 and 2 from five-point stencils: centred in the interior,
/// continued through the origin by reflection on the first two rings, and one-sided on the
/// last two rings.
inline std::pair<NodeField, NodeField> radial_derivatives(const DiskGrid& grid,
                                                          std::span<const cplx> values)
{
    const int nr = grid.nr();
    const int nt = grid.ntheta();
    if (nr < 5)
        throw Error(ErrorKind::usage, "radial_derivatives: need at least 5 rings");
    if (values.size() != grid.size())
        throw Error(ErrorKind::usage, "radial_derivatives: field size does not match grid");
    NodeField d1(values.size()), d2(values.size());

    // Stencil rings for row j; negative entries -(m+1) stand for ring m reflected through 0.
    auto stencil = [nr](int j) -> std::array<int, 5> {
        if (j == 0)
            return {-2, -1, 0, 1, 2};
        if (j == 1)
            return {-1, 0, 1, 2, 3};
        if (j >= nr - 2)
            return {nr - 5, nr - 4, nr - 3, nr - 2, nr - 1};
        return {j - 2, j - 1, j, j + 1, j + 2};
    };
    for (int j = 0; j < nr; ++j) {
        const auto rings = stencil(j);
        std::array<double, 5> x;
        for (int q = 0; q < 5; ++q)
            x[q] = rings[q] >= 0 ? grid.radius(rings[q]) : -grid.radius(-rings[q] - 1);
        const auto w = detail::fornberg_weights(grid.radius(j), x, 2);
        for (int a = 0; a < nt; ++a) {
            cplx s1 = 0.0, s2 = 0.0;
            for (int q = 0; q < 5; ++q) {
                const cplx f = rings[q] >= 0 ? values[grid.index(rings[q], a)]
                                             : values[grid.index(-rings[q] - 1, (a + nt / 2) % nt)];
                s1 += w[1][q] * f;
                s2 += w[2][q] * f;
            }
            d1[grid.index(j, a)] = s1;
            d2[grid.index(j, a)] = s2;
        }
    }
    return {std::move(d1), std::move(d2)};
}

inline PolarDerivatives polar_derivatives(const DiskGrid& grid, std::span<const cplx> values)
{
    PolarDerivatives d;
    std::tie(d.dr, d.drr) = radial_derivatives(grid, values);
    std::tie(d.dt, d.dtt) = angular_derivatives(grid, values);
    return d;
}

struct WirtingerPair {
    NodeField dz;
    NodeField dzbar;
};

namespace detail {

inline WirtingerPair assemble_wirtinger(const DiskGrid& grid, const PolarDerivatives& d)
{
    WirtingerPair out{NodeField(grid.size()), NodeField(grid.size())};
    for (int j = 0; j < grid.nr(); ++j) {
        const double r = grid.radius(j);
        for (int a = 0; a < grid.ntheta(); ++a) {
            const std::size_t i = grid.index(j, a);
            const cplx e = std::polar(1.0, grid.angle(a));
            const cplx angular = imag_unit * d.dt[i] / r;
            out.dz[i] = 0.5 * std::conj(e) * (d.dr[i] - angular);
            out.dzbar[i] = 0.5 * e * (d.dr[i] + angular);
        }
    }
    return out;
}

inline NodeField assemble_laplacian(const DiskGrid& grid, const PolarDerivatives& d)
{
    NodeField lap(grid.size());
    for (int j = 0; j < grid.nr(); ++j) {
        const double r = grid.radius(j);
        for (int a = 0; a < grid.ntheta(); ++a) {
            const std::size_t i = grid.index(j, a);
            lap[i] = d.drr[i] + d.dr[i] / r + d.dtt[i] / (r * r);
        }
    }
    return lap;
}

} // namespace detail

/// (w_z, w_zbar) at every interior node of a map field.
inline WirtingerPair wirtinger_derivatives(const MapField& w)
{
    return detail::assemble_wirtinger(w.grid, polar_derivatives(w.grid, w.values));
}

/// Wirtinger derivatives of a bare node field.
inline WirtingerPair wirtinger_derivatives(const DiskGrid& grid, std::span<const cplx> values)
{
    return detail::assemble_wirtinger(grid, polar_derivatives(grid, values));
}

/// Delta w = 4 w_{z zbar} = w_rr + w_r / r + w_thetatheta / r^2.
inline NodeField laplacian(const MapField& w)
{
    return detail::assemble_laplacian(w.grid, polar_derivatives(w.grid, w.values));
}

inline NodeField laplacian(const DiskGrid& grid, std::span<const cplx> values)
{
    return detail::assemble_laplacian(grid, polar_derivatives(grid, values));
}

/// Derivatives, Laplacian and the field itself in one pass.
struct FieldJet {
    NodeField dz, dzbar, laplacian;
};

inline FieldJet field_jet(const MapField& w)
{
    const auto d = polar_derivatives(w.grid, w.values);
    auto wp = detail::assemble_wirtinger(w.grid, d);
    return {std::move(wp.dz), std::move(wp.dzbar), detail::assemble_laplacian(w.grid, d)};
}

} // namespace harmap
