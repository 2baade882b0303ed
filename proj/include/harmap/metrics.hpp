#pragma once

// Conformal metrics rho(w)|dw| on the target disk.

#include <harmap/core.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace harmap {

enum class MetricKind { euclidean, spherical, hyperbolic, radial_catalog };

inline const char* to_string(MetricKind kind) noexcept
{
    switch (kind) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::spherical: return "spherical";
    case MetricKind::hyperbolic: return "hyperbolic";
    case MetricKind::radial_catalog: return "radial_catalog";
    }
    return "unknown";
}

class ConformalMetric;
std::optional<double> approx_analytic_bound(const ConformalMetric& metric, int resolution);

/// Density rho(w) > 0 together with the complex log-derivative (log rho^2)_w.
///
/// Custom metrics come only from the radial catalog rho = c0 + c1|w|^2 + c2|w|^4,
/// whose positivity is checked on a radius grid at construction.
class ConformalMetric {
public:
    static ConformalMetric euclidean() { return ConformalMetric(MetricKind::euclidean, {1.0, 0.0, 0.0}); }
    static ConformalMetric spherical() { return ConformalMetric(MetricKind::spherical, {}); }
    static ConformalMetric hyperbolic() { return ConformalMetric(MetricKind::hyperbolic, {}); }

    static ConformalMetric radial_catalog(double c0, double c1, double c2)
    {
        if (!std::isfinite(c0) || !std::isfinite(c1) || !std::isfinite(c2))
            throw Error(ErrorKind::input, "radial_catalog: coefficients must be finite");
        constexpr int samples = 4096;
        for (int i = 0; i <= samples; ++i) {
            const double s = static_cast<double>(i) / samples; // s = |w|^2
            if (!(c0 + c1 * s + c2 * s * s > 0.0))
                throw Error(ErrorKind::input,
                            "radial_catalog: density c0 + c1|w|^2 + c2|w|^4 is not positive at |w| = "
                                + std::to_string(std::sqrt(s)));
        }
        return ConformalMetric(MetricKind::radial_catalog, {c0, c1, c2});
    }

    MetricKind kind() const noexcept { return kind_; }
    std::string name() const { return to_string(kind_); }
    const std::array<double, 3>& coefficients() const noexcept { return coeffs_; }

    double density(cplx w) const
    {
        const double s = abs2(w);
        switch (kind_) {
        case MetricKind::euclidean: return 1.0;
        case MetricKind::spherical: return 2.0 / (1.0 + s);
        case MetricKind::hyperbolic:
            if (s >= 1.0)
                throw Error(ErrorKind::domain, "hyperbolic density: |w| >= 1");
            return 2.0 / (1.0 - s);
        case MetricKind::radial_catalog: return coeffs_[0] + coeffs_[1] * s + coeffs_[2] * s * s;
        }
        return 1.0;
    }

    /// (log rho^2)_w, the coefficient of the harmonic-map equation.
    cplx log_density_derivative(cplx w) const
    {
        const double s = abs2(w);
        const cplx wb = std::conj(w);
        switch (kind_) {
        case MetricKind::euclidean: return 0.0;
        case MetricKind::spherical: return -2.0 * wb / (1.0 + s);
        case MetricKind::hyperbolic:
            if (s >= 1.0)
                throw Error(ErrorKind::domain, "hyperbolic log-derivative: |w| >= 1");
            return 2.0 * wb / (1.0 - s);
        case MetricKind::radial_catalog: {
            const double rho = coeffs_[0] + coeffs_[1] * s + coeffs_[2] * s * s;
            return 2.0 * (coeffs_[1] + 2.0 * coeffs_[2] * s) * wb / rho;
        }
        }
        return 0.0;
    }

    /// True where the evaluation is numerically meaningless (hyperbolic metric near the rim).
    bool evaluation_flagged(cplx w) const noexcept
    {
        return kind_ == MetricKind::hyperbolic && 1.0 - std::abs(w) < 1e-6;
    }

    /// Grid estimate of sup |(log rho^2)_w|; empty when unbounded.
    const std::optional<double>& analyticity_bound() const noexcept { return bound_; }
    bool approximately_analytic() const noexcept { return bound_.has_value(); }

private:
    ConformalMetric(MetricKind kind, std::array<double, 3> coeffs) : kind_(kind), coeffs_(coeffs)
    {
        bound_ = approx_analytic_bound(*this, 64);
    }

    MetricKind kind_;
    std::array<double, 3> coeffs_{};
    std::optional<double> bound_;
};

inline cplx log_density_derivative(const ConformalMetric& metric, cplx w)
{
    return metric.log_density_derivative(w);
}

namespace detail {

// Radii j/res for j < res, with the rim replaced by the interior proxy 1 - 1/res^2.
inline double sup_log_derivative(const ConformalMetric& metric, int res)
{
    double best = 0.0;
    const int n_angles = 4 * res;
    for (int j = 0; j <= res; ++j) {
        const double r = j < res ? static_cast<double>(j) / res : 1.0 - 1.0 / (double(res) * res);
        for (int a = 0; a < n_angles; ++a) {
            const cplx w = std::polar(r, two_pi * a / n_angles);
            best = std::max(best, std::abs(metric.log_density_derivative(w)));
        }
    }
    return best;
}

} // namespace detail

/// Grid maximisation of |(log rho^2)_w| over the closed disk. The estimate is declared
/// unbounded (empty result) when it at least doubles under one refinement.
inline std::optional<double> approx_analytic_bound(const ConformalMetric& metric, int resolution)
{
    if (resolution < 16)
        throw Error(ErrorKind::usage, "approx_analytic_bound: resolution must be >= 16");
    const double coarse = detail::sup_log_derivative(metric, resolution);
    const double fine = detail::sup_log_derivative(metric, 2 * resolution);
    if (coarse > 0.0 && fine >= 2.0 * coarse)
        return std::nullopt;
    return fine;
}

/// Christoffel symbols of g_{jk} = rho^2 delta_{jk}, indexed gamma[i][k][l] (0-based).
struct ChristoffelSymbols {
    double gamma[2][2][2]{};

    double operator()(int i, int k, int l) const { return gamma[i][k][l]; }
};

inline ChristoffelSymbols christoffel_symbols(const ConformalMetric& metric, cplx w)
{
    // With phi = log rho: (log rho^2)_w = phi_x - i phi_y.
    const cplx L = metric.log_density_derivative(w);
    const double px = L.real();
    const double py = -L.imag();
    ChristoffelSymbols s;
    s.gamma[0][0][0] = px;
    s.gamma[0][0][1] = s.gamma[0][1][0] = py;
    s.gamma[0][1][1] = -px;
    s.gamma[1][0][0] = -py;
    s.gamma[1][0][1] = s.gamma[1][1][0] = px;
    s.gamma[1][1][1] = py;
    return s;
}

/// Laplacian of (u^1, u^2) predicted by the real Christoffel system,
///   Delta u^i = -sum_alpha Gamma^i_kl D_alpha u^k D_alpha u^l,
/// for a map whose Wirtinger derivatives at the point are (wz, wzbar). Returned as u^1 + i u^2.
inline cplx christoffel_laplacian(const ChristoffelSymbols& s, cplx wz, cplx wzbar)
{
    const cplx wx = wz + wzbar;
    const cplx wy = imag_unit * (wz - wzbar);
    const double grad[2][2] = {{wx.real(), wy.real()}, {wx.imag(), wy.imag()}}; // grad[k][alpha]
    double out[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
                for (int alpha = 0; alpha < 2; ++alpha)
                    out[i] -= s.gamma[i][k][l] * grad[k][alpha] * grad[l][alpha];
    return {out[0], out[1]};
}

} // namespace harmap
