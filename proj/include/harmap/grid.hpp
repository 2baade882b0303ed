#pragma once

#include <harmap/core.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace harmap {

/// Tensor polar grid on the closed unit disk.
///
/// Radii sit at cell midpoints r_j = (j + 1/2)/Nr, j = 0..Nr-1, so the origin is never a node;
/// angles are theta_a = 2 pi a / Ntheta. Node (j, a) owns the polar cell
/// [j/Nr, (j+1)/Nr] x [theta_a - dtheta/2, theta_a + dtheta/2], whose area is the quadrature
/// weight. The weights sum to pi exactly.
class DiskGrid {
public:
    DiskGrid(int nr, int ntheta) : nr_(nr), ntheta_(ntheta)
    {
        if (nr < 1 || ntheta < 2)
            throw Error(ErrorKind::input, "DiskGrid: need nr >= 1 and ntheta >= 2");
        if (ntheta % 2 != 0)
            throw Error(ErrorKind::input, "DiskGrid: ntheta must be even");
    }

    int nr() const noexcept { return nr_; }
    int ntheta() const noexcept { return ntheta_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nr_) * ntheta_; }

    double dr() const noexcept { return 1.0 / nr_; }
    double dtheta() const noexcept { return two_pi / ntheta_; }

    double radius(int j) const noexcept { return (j + 0.5) / nr_; }
    double angle(int a) const noexcept { return two_pi * a / ntheta_; }
    cplx node(int j, int a) const noexcept { return std::polar(radius(j), angle(a)); }
    cplx rim(int a) const noexcept { return std::polar(1.0, angle(a)); }

    /// Area of the cell owned by any node on ring j.
    double weight(int j) const noexcept { return radius(j) * dr() * dtheta(); }

    std::size_t index(int j, int a) const noexcept
    {
        return static_cast<std::size_t>(j) * ntheta_ + a;
    }

    /// Radial and angular resolution doubled.
    DiskGrid refined() const { return DiskGrid(2 * nr_, 2 * ntheta_); }

    bool operator==(const DiskGrid&) const = default;

private:
    int nr_;
    int ntheta_;
};

/// Complex samples on the interior nodes of a grid, radius-major.
using NodeField = std::vector<cplx>;
using RealField = std::vector<double>;

/// A complex-valued function on the closed disk: interior node values plus the values on the
/// unit circle at the grid angles.
struct MapField {
    DiskGrid grid;
    NodeField values;
    std::vector<cplx> boundary;

    explicit MapField(const DiskGrid& g)
        : grid(g), values(g.size()), boundary(static_cast<std::size_t>(g.ntheta()))
    { }

    MapField(const DiskGrid& g, NodeField v, std::vector<cplx> b)
        : grid(g), values(std::move(v)), boundary(std::move(b))
    {
        if (values.size() != grid.size() || boundary.size() != static_cast<std::size_t>(grid.ntheta()))
            throw Error(ErrorKind::input, "MapField: sample counts do not match the grid");
    }

    cplx& at(int j, int a) { return values[grid.index(j, a)]; }
    cplx at(int j, int a) const { return values[grid.index(j, a)]; }

    /// |w| <= 1 + slack everywhere, the discrete form of "self-map of the disk".
    bool is_self_map(double slack = 1e-8) const
    {
        for (cplx v : values)
            if (std::abs(v) > 1.0 + slack)
                return false;
        for (cplx v : boundary)
            if (std::abs(v) > 1.0 + slack)
                return false;
        return true;
    }
};

/// Samples a callable on every interior node and on the rim.
template<typename F>
MapField sample(const DiskGrid& grid, F&& f)
{
    MapField field(grid);
    for (int j = 0; j < grid.nr(); ++j)
        for (int a = 0; a < grid.ntheta(); ++a)
            field.at(j, a) = f(grid.node(j, a));
    for (int a = 0; a < grid.ntheta(); ++a)
        field.boundary[a] = f(grid.rim(a));
    return field;
}

/// Circle homeomorphism e^{i theta} -> e^{i phi(theta)},
///   phi(theta) = theta + sum_k (a_k sin k theta + b_k cos k theta),
/// required to be orientation preserving (phi' > 0).
class BoundaryMap {
public:
    BoundaryMap() = default;

    BoundaryMap(std::vector<double> sin_coeffs, std::vector<double> cos_coeffs)
        : a_(std::move(sin_coeffs)), b_(std::move(cos_coeffs))
    {
        const std::size_t degree = std::max(a_.size(), b_.size());
        a_.resize(degree, 0.0);
        b_.resize(degree, 0.0);
        for (std::size_t k = 0; k < degree; ++k)
            if (!std::isfinite(a_[k]) || !std::isfinite(b_[k]))
                throw Error(ErrorKind::input, "BoundaryMap: coefficients must be finite");
        const int checks = std::max<int>(4096, 64 * static_cast<int>(degree));
        for (int i = 0; i < checks; ++i) {
            const double theta = two_pi * i / checks;
            const double d = phase_derivative(theta);
            if (!(d > 0.0))
                throw Error(ErrorKind::input,
                            "BoundaryMap: not an orientation-preserving homeomorphism "
                            "(homeomorphism check failed: phase derivative "
                                + std::to_string(d) + " at theta = " + std::to_string(theta) + ")");
        }
    }

    static BoundaryMap identity() { return {}; }

    int degree() const noexcept { return static_cast<int>(a_.size()); }
    std::span<const double> sin_coeffs() const noexcept { return a_; }
    std::span<const double> cos_coeffs() const noexcept { return b_; }

    double phase(double theta) const noexcept
    {
        double p = theta;
        for (std::size_t k = 0; k < a_.size(); ++k) {
            const double kt = static_cast<double>(k + 1) * theta;
            p += a_[k] * std::sin(kt) + b_[k] * std::cos(kt);
        }
        return p;
    }

    double phase_derivative(double theta) const noexcept
    {
        double d = 1.0;
        for (std::size_t k = 0; k < a_.size(); ++k) {
            const double kk = static_cast<double>(k + 1);
            d += kk * (a_[k] * std::cos(kk * theta) - b_[k] * std::sin(kk * theta));
        }
        return d;
    }

    cplx operator()(double theta) const { return std::polar(1.0, phase(theta)); }

private:
    std::vector<double> a_;
    std::vector<double> b_;
};

} // namespace harmap
