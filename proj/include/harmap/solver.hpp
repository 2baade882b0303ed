#pragma once

// Damped Picard iteration on w = P[f] - G[g(w)] for the rho-harmonic map equation
//   w_{z zbar} + (log rho^2)_w(w) w_z w_zbar = 0.

#include <harmap/core.hpp>
#include <harmap/grid.hpp>
#include <harmap/interpolate.hpp>
#include <harmap/metrics.hpp>
#include <harmap/potentials.hpp>
#include <harmap/stencils.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace harmap {

struct SolverConfig {
    double tolerance = 1e-9;
    int max_iterations = 500;
    double damping = 0.5;
    int refinement_levels = 1;

    void validate() const
    {
        if (!(tolerance > 0.0) || !std::isfinite(tolerance))
            throw Error(ErrorKind::input, "solver.tol must be a positive number");
        if (max_iterations < 1)
            throw Error(ErrorKind::input, "solver.max_iterations must be >= 1");
        if (!(damping > 0.0 && damping <= 1.0))
            throw Error(ErrorKind::input, "solver.damping must lie in (0, 1]");
        if (refinement_levels < 1)
            throw Error(ErrorKind::input, "solver.refinement_levels must be >= 1");
    }
};

struct SolveReport {
    int iterations = 0;
    double final_update = 0.0;
    double residual = 0.0;            // sup |Delta w - g(w)| on the returned grid
    std::vector<double> history;      // sup-norm update per iteration, all levels in order
    bool converged = false;
    std::vector<double> level_residuals;

    /// Update norms are non-increasing after the first `skip` iterations.
    bool monotone_after(int skip = 3) const
    {
        for (std::size_t i = static_cast<std::size_t>(skip) + 1; i < history.size(); ++i)
            if (history[i] > history[i - 1])
                return false;
        return true;
    }
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, SolveReport report)
        : Error(ErrorKind::divergence, what), report_(std::move(report))
    { }

    const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

namespace detail {

inline void require_bounded_metric(const ConformalMetric& metric, const char* what)
{
    if (!metric.approximately_analytic())
        throw Error(ErrorKind::input,
                    std::string(what) + ": metric '" + metric.name()
                        + "' fails the approximate-analyticity gate (sup |(log rho^2)_w| is unbounded)");
}

inline NodeField nonlinearity_from(const ConformalMetric& metric, std::span<const cplx> w,
                                   const WirtingerPair& d)
{
    NodeField g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        g[i] = -4.0 * metric.log_density_derivative(w[i]) * d.dz[i] * d.dzbar[i];
    return g;
}

inline double sup_distance(std::span<const cplx> a, std::span<const cplx> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

} // namespace detail

/// g = -4 (log rho^2)_w(w) w_z w_zbar, so that the equation reads Delta w = g.
inline NodeField nonlinearity(const ConformalMetric& metric, const MapField& w)
{
    detail::require_bounded_metric(metric, "nonlinearity");
    return detail::nonlinearity_from(metric, w.values, wirtinger_derivatives(w));
}

/// sup |Delta w - g(w)| over the interior nodes.
inline double pde_residual(const ConformalMetric& metric, const MapField& w)
{
    const FieldJet jet = field_jet(w);
    double s = 0.0;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        const cplx g = -4.0 * metric.log_density_derivative(w.values[i]) * jet.dz[i] * jet.dzbar[i];
        s = std::max(s, std::abs(jet.laplacian[i] - g));
    }
    return s;
}

namespace detail {

// One grid level. `initial` is the starting iterate (P[f] when empty).
inline MapField picard(const ConformalMetric& metric, const MapField& harmonic_part,
                       const GreenOperator& green, const SolverConfig& config,
                       const NodeField* initial, SolveReport& report)
{
    MapField w = harmonic_part;
    if (initial != nullptr)
        w.values = *initial;
    const double lambda = config.damping;
    for (int it = 1; it <= config.max_iterations; ++it) {
        const NodeField g = nonlinearity_from(metric, w.values, wirtinger_derivatives(w));
        const NodeField gw = green.apply(g);
        double update = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < w.values.size(); ++i) {
            const cplx target = harmonic_part.values[i] - gw[i];
            const cplx next = (1.0 - lambda) * w.values[i] + lambda * target;
            if (!std::isfinite(next.real()) || !std::isfinite(next.imag()))
                finite = false;
            update = std::max(update, std::abs(next - w.values[i]));
            w.values[i] = next;
        }
        ++report.iterations;
        report.history.push_back(finite ? update : std::nan(""));
        report.final_update = update;
        if (!finite)
            throw DivergenceError("solve: iterate became non-finite at iteration " + std::to_string(it),
                                  report);
        if (update < config.tolerance) {
            report.converged = true;
            return w;
        }
    }
    throw DivergenceError("solve: no convergence within " + std::to_string(config.max_iterations)
                              + " iterations (last update " + std::to_string(report.final_update) + ")",
                          report);
}

} // namespace detail

/// Solves the boundary value problem on `grid` (and on `refinement_levels - 1` successively
/// refined grids, each warm-started from the previous level). Returns the finest solution.
inline std::pair<MapField, SolveReport> solve(const ConformalMetric& metric,
                                              const BoundaryMap& boundary, const DiskGrid& grid,
                                              const SolverConfig& config = {})
{
    config.validate();
    detail::require_bounded_metric(metric, "solve");
    if (grid.nr() < 5)
        throw Error(ErrorKind::input, "solve: grid needs at least 5 rings");

    SolveReport report;
    DiskGrid level_grid = grid;
    std::optional<MapField> previous;
    for (int level = 0; level < config.refinement_levels; ++level) {
        if (level > 0)
            level_grid = level_grid.refined();
        const MapField harmonic_part = poisson_extend(boundary, level_grid);
        const GreenOperator green(level_grid);
        NodeField start;
        if (previous) {
            const SmoothInterpolant interp(*previous);
            start.resize(level_grid.size());
            for (int j = 0; j < level_grid.nr(); ++j)
                for (int a = 0; a < level_grid.ntheta(); ++a)
                    start[level_grid.index(j, a)] = interp(level_grid.node(j, a));
        }
        MapField w = detail::picard(metric, harmonic_part, green, config,
                                    previous ? &start : nullptr, report);
        report.residual = pde_residual(metric, w);
        report.level_residuals.push_back(report.residual);
        previous = std::move(w);
    }
    return {std::move(*previous), std::move(report)};
}

} // namespace harmap
