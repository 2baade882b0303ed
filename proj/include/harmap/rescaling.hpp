#pragma once

// Blow-up families w_n = p_n o w o q_n and the n-uniform bounds they satisfy.

#include <harmap/core.hpp>
#include <harmap/diagnostics.hpp>
#include <harmap/disk_geometry.hpp>
#include <harmap/grid.hpp>
#include <harmap/interpolate.hpp>
#include <harmap/metrics.hpp>
#include <harmap/stencils.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace harmap {

using geometry::DiskAutomorphism;

struct BlowupMember {
    cplx zn;
    DiskAutomorphism p; // to_zero(w(z_n))
    DiskAutomorphism q; // from_zero(z_n)
    MapField wn;
};

struct BlowupFamily {
    MapField base;
    std::vector<BlowupMember> members;
};

namespace detail {

// Interpolated values of a self-map may overshoot the unit circle by the interpolation error.
inline cplx into_closed_disk(cplx w)
{
    const double m = std::abs(w);
    if (m <= 1.0)
        return w;
    if (m > 1.0 + 1e-6)
        throw Error(ErrorKind::invalid_map, "blowup_map: base map leaves the closed disk");
    return w / m;
}

} // namespace detail

/// Samples p_n(w(q_n(z))) on `grid`, with w evaluated by the smooth interpolant.
inline BlowupMember blowup_map(const SmoothInterpolant& w, cplx zn, const DiskGrid& grid)
{
    if (!(std::abs(zn) < 1.0))
        throw Error(ErrorKind::domain, "blowup_map: |z_n| must be < 1");
    const cplx wzn = w(zn);
    if (!(std::abs(wzn) < 1.0))
        throw Error(ErrorKind::invalid_map, "blowup_map: |w(z_n)| >= 1");
    const auto p = DiskAutomorphism::to_zero(wzn);
    const auto q = DiskAutomorphism::from_zero(zn);
    auto composed = [&](cplx z) { return p(detail::into_closed_disk(w(q(z)))); };
    return {zn, p, q, sample(grid, composed)};
}

inline BlowupMember blowup_map(const MapField& w, cplx zn, const DiskGrid& grid)
{
    return blowup_map(SmoothInterpolant(w), zn, grid);
}

/// z_n = (1 - 2^-n) e^{i theta0}, n = 1..count.
inline std::vector<cplx> default_sequence(int count = 6, double theta0 = 0.0)
{
    if (count < 1)
        throw Error(ErrorKind::input, "rescale.count must be >= 1");
    std::vector<cplx> z;
    for (int n = 1; n <= count; ++n)
        z.push_back(std::polar(1.0 - std::ldexp(1.0, -n), theta0));
    return z;
}

inline BlowupFamily build_family(const MapField& w, const std::vector<cplx>& sequence,
                                 std::optional<DiskGrid> grid = std::nullopt)
{
    const DiskGrid g = grid.value_or(w.grid);
    const SmoothInterpolant interp(w);
    BlowupFamily fam{w, {}};
    for (cplx zn : sequence)
        fam.members.push_back(blowup_map(interp, zn, g));
    return fam;
}

/// rho_n^2(z) = rho^2(w(q_n z)) / (|p_n'(w(q_n z))|^2 (1 - |z_n|^2)^2).
inline double induced_metric_density_squared(const ConformalMetric& metric,
                                             const SmoothInterpolant& w, cplx zn, cplx z)
{
    const cplx wzn = w(zn);
    if (!(std::abs(wzn) < 1.0))
        throw Error(ErrorKind::invalid_map, "induced_metric_density: |w(z_n)| >= 1");
    const auto p = DiskAutomorphism::to_zero(wzn);
    const auto q = DiskAutomorphism::from_zero(zn);
    const cplx u = detail::into_closed_disk(w(q(z)));
    const double rho = metric.density(u);
    const double dp = std::abs(p.derivative(u, 1));
    const double s = 1.0 - abs2(zn);
    return rho * rho / (dp * dp * s * s);
}

inline double induced_metric_density(const ConformalMetric& metric, const MapField& w, cplx zn,
                                     cplx z)
{
    return std::sqrt(induced_metric_density_squared(metric, SmoothInterpolant(w), zn, z));
}

/// Per-member suprema of the rescaled bounds, over |z| <= 1 - 3h.
struct MemberBounds {
    cplx zn;
    double C1 = 0.0;   // sup |grad w_n| (1 - |z|)
    double C2 = 0.0;   // sup |Delta w_n| (1 - |z|)^2
    double C3 = 0.0;   // sup |Delta w_n| (1 - |z|)^2 / (|w_n,z| |w_n,zbar|)
    bool C3_skipped = false;
    std::size_t C3_skipped_nodes = 0;
    double hopf = 0.0; // sup |Psi_n| (1 - |z|)^4
    double origin = 0.0; // |w_n(0)|
};

struct LemmaReport {
    std::vector<MemberBounds> members;
    double C1 = 0.0, C2 = 0.0, C3 = 0.0, hopf = 0.0;
    bool C1_uniform = true, C2_uniform = true, C3_uniform = true, hopf_uniform = true;
    bool normalized = true;
};

namespace detail {

// max/min across the family below 1.5, i.e. the estimates vary by less than 50%. Families whose
// estimates all sit at round-off level count as uniform.
inline bool uniform(const std::vector<double>& v, double noise = 1e-9)
{
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double x : v) {
        if (!std::isfinite(x))
            return false;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (v.empty() || hi <= noise)
        return true;
    return lo > 0.0 && hi / lo < 1.5;
}

inline bool inside_checked_region(const DiskGrid& g, int j) { return g.radius(j) <= 1.0 - 3.0 * g.dr(); }

} // namespace detail

inline MemberBounds member_bounds(const BlowupMember& m, const ConformalMetric& metric,
                                  const SmoothInterpolant& base)
{
    const DiskGrid& g = m.wn.grid;
    const FieldJet jet = field_jet(m.wn);
    MemberBounds b;
    b.zn = m.zn;
    b.origin = std::abs(origin_value(m.wn));
    bool any_c3 = false;
    for (int j = 0; j < g.nr(); ++j) {
        if (!detail::inside_checked_region(g, j))
            continue;
        const double d = 1.0 - g.radius(j);
        for (int a = 0; a < g.ntheta(); ++a) {
            const std::size_t i = g.index(j, a);
            const double pz = std::abs(jet.dz[i]);
            const double pzb = std::abs(jet.dzbar[i]);
            const double lap = std::abs(jet.laplacian[i]);
            b.C1 = std::max(b.C1, (pz + pzb) * d);
            b.C2 = std::max(b.C2, lap * d * d);
            if (pzb < 1e-12 || pz < 1e-12) {
                ++b.C3_skipped_nodes;
            } else {
                b.C3 = std::max(b.C3, lap * d * d / (pz * pzb));
                any_c3 = true;
            }
            const double rho2 = induced_metric_density_squared(metric, base, m.zn, g.node(j, a));
            const double psi = rho2 * pz * pzb;
            b.hopf = std::max(b.hopf, psi * d * d * d * d);
        }
    }
    b.C3_skipped = !any_c3;
    return b;
}

namespace detail {

inline LemmaReport summarize(std::vector<MemberBounds> members)
{
    LemmaReport r;
    std::vector<double> c1, c2, c3, hp;
    for (const auto& m : members) {
        c1.push_back(m.C1);
        c2.push_back(m.C2);
        if (!m.C3_skipped)
            c3.push_back(m.C3);
        hp.push_back(m.hopf);
        r.C1 = std::max(r.C1, m.C1);
        r.C2 = std::max(r.C2, m.C2);
        r.C3 = std::max(r.C3, m.C3);
        r.hopf = std::max(r.hopf, m.hopf);
        if (m.origin > origin_tolerance)
            r.normalized = false;
    }
    r.C1_uniform = uniform(c1);
    r.C2_uniform = uniform(c2);
    r.C3_uniform = uniform(c3);
    r.hopf_uniform = uniform(hp);
    r.members = std::move(members);
    return r;
}

} // namespace detail

/// Gradient, Laplacian and product bounds for every member; constants are the family maxima.
inline LemmaReport lemma_bounds_check(const BlowupFamily& family, const ConformalMetric& metric)
{
    const SmoothInterpolant base(family.base);
    std::vector<MemberBounds> out;
    for (const auto& m : family.members)
        out.push_back(member_bounds(m, metric, base));
    return detail::summarize(std::move(out));
}

/// sup |Psi_n| (1 - |z|)^4 per member, Psi_n = rho_n^2 w_n,z conj(w_n,zbar).
inline std::vector<double> hopf_bound_check(const BlowupFamily& family, const ConformalMetric& metric)
{
    const LemmaReport r = lemma_bounds_check(family, metric);
    std::vector<double> out;
    for (const auto& m : r.members)
        out.push_back(m.hopf);
    return out;
}

/// sup over |z| <= max_radius (default 1 - 3h) of |Delta w_n + 4 S_n w_n,z w_n,zbar| with the
/// transported coefficient S_n = ((log rho^2)_w(u) - p_n''(u)/p_n'(u)) / p_n'(u), u = w(q_n z).
/// By the chain rule the base residual at q_n(z) reappears scaled by |p_n'(u)| |q_n'(z)|^2.
inline double transported_residual(const BlowupMember& m, const ConformalMetric& metric,
                                   const SmoothInterpolant& base,
                                   std::optional<double> max_radius = std::nullopt)
{
    const DiskGrid& g = m.wn.grid;
    const double limit = max_radius.value_or(1.0 - 3.0 * g.dr());
    const FieldJet jet = field_jet(m.wn);
    double s = 0.0;
    for (int j = 0; j < g.nr(); ++j) {
        if (g.radius(j) > limit)
            continue;
        for (int a = 0; a < g.ntheta(); ++a) {
            const std::size_t i = g.index(j, a);
            const cplx u = detail::into_closed_disk(base(m.q(g.node(j, a))));
            const cplx d1 = m.p.derivative(u, 1);
            const cplx d2 = m.p.derivative(u, 2);
            const cplx S = (metric.log_density_derivative(u) - d2 / d1) / d1;
            s = std::max(s, std::abs(jet.laplacian[i] + 4.0 * S * jet.dz[i] * jet.dzbar[i]));
        }
    }
    return s;
}

} // namespace harmap
