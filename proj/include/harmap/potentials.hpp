#pragma once

// The two halves of the representation w = P[f] - G[g]:
//   P[f]  harmonic extension of boundary data (Poisson integral),
//   G[g]  Green potential, int_U G(z, w) g(w) dm(w).

#include <harmap/core.hpp>
#include <harmap/disk_geometry.hpp>
#include <harmap/fourier.hpp>
#include <harmap/grid.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace harmap {

/// Harmonic extension of samples f(e^{2 pi i m / M}), m = 0..M-1.
///
/// The Poisson integral is evaluated mode by mode: the trapezoidal rule on the M samples gives
/// the Fourier coefficients c_k, and P[f](r e^{i theta}) = sum_k c_k r^{|k|} e^{i k theta}.
/// The Nyquist mode of an even M is split evenly between +M/2 and -M/2.
inline MapField poisson_extend(std::span<const cplx> samples, const DiskGrid& grid)
{
    const int m_count = static_cast<int>(samples.size());
    if (m_count < 1)
        throw Error(ErrorKind::input, "poisson_extend: no boundary samples");
    for (cplx s : samples)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw Error(ErrorKind::input, "poisson_extend: boundary samples must be finite");

    std::vector<cplx> coeff(samples.begin(), samples.end());
    fourier::transform_rings(coeff, m_count, fourier::Direction::forward);
    for (cplx& c : coeff)
        c /= double(m_count);

    const int nt = grid.ntheta();
    auto fold = [&](double r, std::span<cplx> ring) {
        std::fill(ring.begin(), ring.end(), cplx(0.0));
        for (int k = 0; k < m_count; ++k) {
            const int m = fourier::wavenumber(k, m_count);
            auto bin = [&](int wave) { return ((wave % nt) + nt) % nt; };
            if (m_count % 2 == 0 && 2 * m == m_count) {
                const cplx half = 0.5 * coeff[k] * std::pow(r, m);
                ring[bin(m)] += half;
                ring[bin(-m)] += half;
            } else {
                ring[bin(m)] += coeff[k] * std::pow(r, std::abs(m));
            }
        }
    };

    MapField out(grid);
    for (int j = 0; j < grid.nr(); ++j)
        fold(grid.radius(j), std::span<cplx>(out.values).subspan(grid.index(j, 0), nt));
    fourier::transform_rings(out.values, nt, fourier::Direction::backward);

    if (m_count == nt) {
        std::copy(samples.begin(), samples.end(), out.boundary.begin());
    } else {
        fold(1.0, out.boundary);
        fourier::transform_rings(out.boundary, nt, fourier::Direction::backward);
    }
    return out;
}

/// Harmonic extension of a boundary homeomorphism. The map is sampled at four times the grid's
/// angular resolution; the rim values are the exact boundary map.
inline MapField poisson_extend(const BoundaryMap& boundary, const DiskGrid& grid)
{
    const int m_count = 4 * grid.ntheta();
    std::vector<cplx> samples(m_count);
    for (int m = 0; m < m_count; ++m)
        samples[m] = boundary(two_pi * m / m_count);
    MapField out = poisson_extend(samples, grid);
    for (int a = 0; a < grid.ntheta(); ++a)
        out.boundary[a] = boundary(grid.angle(a));
    return out;
}

namespace detail {

struct PolarCell {
    double r0, r1, t0, t1;

    double mid_r() const noexcept { return 0.5 * (r0 + r1); }
    double mid_t() const noexcept { return 0.5 * (t0 + t1); }
    cplx center() const noexcept { return std::polar(mid_r(), mid_t()); }
    double radial_extent() const noexcept { return r1 - r0; }
    double arc_extent() const noexcept { return mid_r() * (t1 - t0); }
    double diameter() const noexcept { return std::hypot(radial_extent(), r1 * (t1 - t0)); }
    double area() const noexcept { return 0.5 * (r1 * r1 - r0 * r0) * (t1 - t0); }
};

inline constexpr std::array<double, 4> gauss4_x{-0.86113631159405257522, -0.33998104358485626480,
                                                0.33998104358485626480, 0.86113631159405257522};
inline constexpr std::array<double, 4> gauss4_w{0.34785484513745385737, 0.65214515486254614263,
                                                0.65214515486254614263, 0.34785484513745385737};

template<typename F>
double gauss_cell(const F& f, const PolarCell& c)
{
    const double hr = 0.5 * (c.r1 - c.r0);
    const double ht = 0.5 * (c.t1 - c.t0);
    double sum = 0.0;
    for (int p = 0; p < 4; ++p) {
        const double rho = c.mid_r() + hr * gauss4_x[p];
        for (int q = 0; q < 4; ++q) {
            const double phi = c.mid_t() + ht * gauss4_x[q];
            sum += gauss4_w[p] * gauss4_w[q] * rho * f(std::polar(rho, phi));
        }
    }
    return sum * hr * ht;
}

template<typename F>
double gauss2_cell(const F& f, const PolarCell& c)
{
    constexpr double x = 0.57735026918962576451;
    const double hr = 0.5 * (c.r1 - c.r0);
    const double ht = 0.5 * (c.t1 - c.t0);
    double sum = 0.0;
    for (double p : {-x, x}) {
        const double rho = c.mid_r() + hr * p;
        for (double q : {-x, x})
            sum += rho * f(std::polar(rho, c.mid_t() + ht * q));
    }
    return sum * hr * ht;
}

/// Tensor Gauss quadrature on a polar cell, bisected along its longer side until every leaf is
/// well separated from the given near-singular points.
template<typename F>
double adaptive_cell(const F& f, const PolarCell& c, std::span<const cplx> singular_points,
                     int depth = 0)
{
    constexpr int max_depth = 24;
    const double diam = c.diameter();
    double separation = std::numeric_limits<double>::infinity();
    for (cplx p : singular_points)
        separation = std::min(separation, std::abs(p - c.center()) - 0.5 * diam);
    if (depth >= max_depth || separation > 2.0 * diam)
        return gauss_cell(f, c);
    if (c.radial_extent() >= c.arc_extent()) {
        const double rm = c.mid_r();
        return adaptive_cell(f, PolarCell{c.r0, rm, c.t0, c.t1}, singular_points, depth + 1)
               + adaptive_cell(f, PolarCell{rm, c.r1, c.t0, c.t1}, singular_points, depth + 1);
    }
    const double tm = c.mid_t();
    return adaptive_cell(f, PolarCell{c.r0, c.r1, c.t0, tm}, singular_points, depth + 1)
           + adaptive_cell(f, PolarCell{c.r0, c.r1, tm, c.t1}, singular_points, depth + 1);
}

} // namespace detail

/// Discrete Green potential on a DiskGrid.
///
/// Each node value g(w_j) is taken constant on its cell, so
///   G[g](z_i) = sum_cells g(cell) * int_cell G(z_i, w) dm(w).
/// Cell integrals use tensor Gauss rules away from z_i and its image 1/conj(z_i), and adaptive
/// bisection towards those points otherwise, including the cell that contains z_i. The first
/// radial moment of the kernel on each cell is tabulated as well, so g is treated as linear in
/// |w| within a cell. Because G(r e^{i a}, rho e^{i b}) depends on (r, rho, b - a) only, the table of
/// cell integrals is a circular convolution in the angular index and is applied through per-ring
/// DFTs: O(Nr^2 Ntheta) per application.
class GreenOperator {
public:
    explicit GreenOperator(const DiskGrid& grid) : grid_(grid)
    {
        const int nr = grid.nr();
        const int nt = grid.ntheta();
        const int nk = nt / 2 + 1;
        spectrum_.assign(static_cast<std::size_t>(nk) * nr * nr, 0.0);
        moment_spectrum_.assign(spectrum_.size(), 0.0);
        std::vector<double> rows(static_cast<std::size_t>(nr) * nt);
        std::vector<double> moment_rows(rows.size());
        for (int i = 0; i < nr; ++i) {
            for (int j = 0; j < nr; ++j) {
                for (int d = 0; d <= nt / 2; ++d) {
                    const auto [k0, k1] = cell_integrals(i, j, d);
                    const std::size_t at = static_cast<std::size_t>(j) * nt;
                    rows[at + d] = k0;
                    moment_rows[at + d] = k1;
                    if (d > 0 && d < nt - d) {
                        rows[at + (nt - d)] = k0;
                        moment_rows[at + (nt - d)] = k1;
                    }
                }
            }
            const auto spec = fourier::real_spectrum(rows, nt);
            const auto mspec = fourier::real_spectrum(moment_rows, nt);
            for (int j = 0; j < nr; ++j)
                for (int k = 0; k < nk; ++k) {
                    const std::size_t to = (static_cast<std::size_t>(k) * nr + i) * nr + j;
                    const std::size_t from = static_cast<std::size_t>(j) * nk + k;
                    spectrum_[to] = spec[from].real();
                    moment_spectrum_[to] = mspec[from].real();
                }
        }
    }

    const DiskGrid& grid() const noexcept { return grid_; }

    /// Cell moments of the kernel for target r_i and the cell of node (j, d):
    ///   ( int_cell G(r_i, w) dm(w),  int_cell G(r_i, w) (|w| - r_j) dm(w) ).
    std::pair<double, double> cell_integrals(int i, int j, int d) const
    {
        const double h = grid_.dr();
        const double dt = grid_.dtheta();
        const double z = grid_.radius(i);
        const double rj = grid_.radius(j);
        const double theta = grid_.angle(d);
        const detail::PolarCell cell{j * h, (j + 1) * h, theta - 0.5 * dt, theta + 0.5 * dt};
        const cplx zc(z, 0.0);
        const cplx image(1.0 / z, 0.0);
        auto moment = [&](cplx w) { return geometry::green_unchecked(zc, w) * (std::abs(w) - rj); };

        // Cells away from both z and its image use a fixed tensor Gauss rule, fine enough that
        // the switch between rules does not show up in second differences of G[g].
        const cplx center = grid_.node(j, d);
        const double separation =
            std::min(std::abs(zc - center), std::abs(image - center)) - 0.5 * cell.diameter();
        auto kernel = [&](cplx w) { return geometry::green_unchecked(zc, w); };
        if (separation > 12.0 * cell.diameter())
            return {detail::gauss2_cell(kernel, cell), detail::gauss2_cell(moment, cell)};
        if (separation > 2.0 * cell.diameter())
            return {detail::gauss_cell(kernel, cell), detail::gauss_cell(moment, cell)};

        const std::array<cplx, 2> near{zc, image};
        return {detail::adaptive_cell(kernel, cell, near), detail::adaptive_cell(moment, cell, near)};
    }

    double cell_integral(int i, int j, int d) const { return cell_integrals(i, j, d).first; }

    /// G[g] at every interior node. Within each cell g is taken linear in |w|, with the radial
    /// slope from centred differences (reflected through the origin on the first ring).
    NodeField apply(std::span<const cplx> g) const
    {
        const int nr = grid_.nr();
        const int nt = grid_.ntheta();
        if (g.size() != grid_.size())
            throw Error(ErrorKind::usage, "GreenOperator::apply: field size does not match grid");
        NodeField spec(g.begin(), g.end());
        NodeField slope(g.size());
        const double h = grid_.dr();
        for (int j = 0; j < nr; ++j)
            for (int a = 0; a < nt; ++a) {
                cplx s;
                if (nr == 1)
                    s = 0.0;
                else if (j == 0)
                    s = (g[grid_.index(1, a)] - g[grid_.index(0, (a + nt / 2) % nt)]) / (2.0 * h);
                else if (j == nr - 1)
                    s = (g[grid_.index(j, a)] - g[grid_.index(j - 1, a)]) / h;
                else
                    s = (g[grid_.index(j + 1, a)] - g[grid_.index(j - 1, a)]) / (2.0 * h);
                slope[grid_.index(j, a)] = s;
            }
        fourier::transform_rings(spec, nt, fourier::Direction::forward);
        fourier::transform_rings(slope, nt, fourier::Direction::forward);

        std::vector<cplx> column(nr), slope_column(nr);
        NodeField out(grid_.size());
        for (int k = 0; k < nt; ++k) {
            const int kk = std::min(k, nt - k);
            for (int j = 0; j < nr; ++j) {
                column[j] = spec[grid_.index(j, k)];
                slope_column[j] = slope[grid_.index(j, k)];
            }
            const std::size_t offset = static_cast<std::size_t>(kk) * nr * nr;
            for (int i = 0; i < nr; ++i) {
                const double* row = &spectrum_[offset + static_cast<std::size_t>(i) * nr];
                const double* mrow = &moment_spectrum_[offset + static_cast<std::size_t>(i) * nr];
                double re = 0.0, im = 0.0;
                for (int j = 0; j < nr; ++j) {
                    re += row[j] * column[j].real() + mrow[j] * slope_column[j].real();
                    im += row[j] * column[j].imag() + mrow[j] * slope_column[j].imag();
                }
                out[grid_.index(i, k)] = cplx(re, im) / double(nt);
            }
        }
        fourier::transform_rings(out, nt, fourier::Direction::backward);
        return out;
    }

    /// G[g] as a map field with zero rim values.
    MapField potential(std::span<const cplx> g) const
    {
        return MapField(grid_, apply(g), std::vector<cplx>(static_cast<std::size_t>(grid_.ntheta())));
    }

private:
    DiskGrid grid_;
    std::vector<double> spectrum_;        // [k][i][j], k = 0..Ntheta/2
    std::vector<double> moment_spectrum_; // same layout, first radial moments
};

/// One-shot G[g]; builds the operator table for the grid.
inline MapField green_potential(std::span<const cplx> g, const DiskGrid& grid)
{
    return GreenOperator(grid).potential(g);
}

} // namespace harmap
