#pragma once

// Quantitative functionals of a map field and checks of the distortion inequalities.

#include <harmap/core.hpp>
#include <harmap/disk_geometry.hpp>
#include <harmap/grid.hpp>
#include <harmap/interpolate.hpp>
#include <harmap/metrics.hpp>
#include <harmap/stencils.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace harmap {

/// One inequality check. `slack` is bound minus attained value, oriented so that a check passes
/// when slack >= -tolerance.
struct CheckRecord {
    std::string name;
    std::string inequality;
    double value = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    bool passed = true;
    cplx where{};
    std::string note;
};

struct DiagnosticsReport {
    std::vector<CheckRecord> records;

    void add(CheckRecord r) { records.push_back(std::move(r)); }

    bool all_passed() const
    {
        return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.passed; });
    }

    const CheckRecord* find(const std::string& name) const
    {
        for (const auto& r : records)
            if (r.name == name)
                return &r;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------------------------
// Dilatation

struct DilatationField {
    RealField k;                         // |w_zbar| / |w_z|, NaN at excluded nodes
    RealField K;                         // (1 + k) / (1 - k), +inf where k >= 1
    double sup_k = 0.0;
    double sup_K = 1.0;
    std::size_t argmax = 0;
    std::vector<std::size_t> singular_nodes;       // |w_z| ~ 0, excluded
    std::vector<std::size_t> orientation_reversed; // k >= 1
};

inline DilatationField dilatation_field(const DiskGrid& grid, const WirtingerPair& d)
{
    DilatationField out;
    const std::size_t n = grid.size();
    out.k.assign(n, std::nan(""));
    out.K.assign(n, std::nan(""));
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        scale = std::max(scale, std::abs(d.dz[i]) + std::abs(d.dzbar[i]));
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(d.dz[i]);
        if (a <= 1e-12 * scale || a == 0.0) {
            out.singular_nodes.push_back(i);
            continue;
        }
        const double k = std::abs(d.dzbar[i]) / a;
        out.k[i] = k;
        out.K[i] = k < 1.0 ? (1.0 + k) / (1.0 - k) : std::numeric_limits<double>::infinity();
        if (k >= 1.0)
            out.orientation_reversed.push_back(i);
        if (k > out.sup_k) {
            out.sup_k = k;
            out.argmax = i;
        }
    }
    out.sup_K = out.sup_k < 1.0 ? (1.0 + out.sup_k) / (1.0 - out.sup_k)
                                : std::numeric_limits<double>::infinity();
    if (out.singular_nodes.size() * 100 > n)
        throw Error(ErrorKind::invalid_map,
                    "dilatation_field: " + std::to_string(out.singular_nodes.size())
                        + " singular nodes exceed 1% of the grid");
    return out;
}

inline DilatationField dilatation_field(const MapField& w)
{
    return dilatation_field(w.grid, wirtinger_derivatives(w));
}

inline double K_from_k(double k) { return (1.0 + k) / (1.0 - k); }

// ---------------------------------------------------------------------------------------------
// Directional derivative bounds

struct BilipschitzEstimate {
    double inf_l = 0.0; // inf (|w_z| - |w_zbar|)
    double sup_L = 0.0; // sup (|w_z| + |w_zbar|)
    cplx argmin{}, argmax{};
    std::vector<double> ring_inf_l; // inf l on each ring
    bool bilipschitz = false;
};

inline BilipschitzEstimate bilipschitz_estimate(const DiskGrid& grid, const WirtingerPair& d,
                                                double threshold = 0.05)
{
    BilipschitzEstimate out;
    out.inf_l = std::numeric_limits<double>::infinity();
    out.ring_inf_l.assign(grid.nr(), std::numeric_limits<double>::infinity());
    for (int j = 0; j < grid.nr(); ++j)
        for (int a = 0; a < grid.ntheta(); ++a) {
            const std::size_t i = grid.index(j, a);
            const double p = std::abs(d.dz[i]);
            const double q = std::abs(d.dzbar[i]);
            const double l = p - q;
            const double L = p + q;
            out.ring_inf_l[j] = std::min(out.ring_inf_l[j], l);
            if (l < out.inf_l) {
                out.inf_l = l;
                out.argmin = grid.node(j, a);
            }
            if (L > out.sup_L) {
                out.sup_L = L;
                out.argmax = grid.node(j, a);
            }
        }
    out.bilipschitz = out.inf_l > threshold;
    return out;
}

inline BilipschitzEstimate bilipschitz_estimate(const MapField& w, double threshold = 0.05)
{
    return bilipschitz_estimate(w.grid, wirtinger_derivatives(w), threshold);
}

// ---------------------------------------------------------------------------------------------
// Hopf differential

/// Psi = rho^2(w) w_z conj(w_zbar).
inline NodeField hopf_differential(const ConformalMetric& metric, const MapField& w)
{
    const WirtingerPair d = wirtinger_derivatives(w);
    NodeField psi(w.values.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double rho = metric.density(w.values[i]);
        psi[i] = rho * rho * d.dz[i] * std::conj(d.dzbar[i]);
    }
    return psi;
}

/// sup |d Psi / d zbar| over all rings but the outermost.
inline double holomorphy_residual(const DiskGrid& grid, std::span<const cplx> psi)
{
    const WirtingerPair d = wirtinger_derivatives(grid, psi);
    double s = 0.0;
    for (int j = 0; j + 1 < grid.nr(); ++j)
        for (int a = 0; a < grid.ntheta(); ++a)
            s = std::max(s, std::abs(d.dzbar[grid.index(j, a)]));
    return s;
}

// ---------------------------------------------------------------------------------------------
// Normalisation

/// Tolerance on |w(0)| for checks stated for normalised maps.
inline constexpr double origin_tolerance = 1e-6;

inline void require_normalized(const MapField& w, const char* who)
{
    const cplx w0 = origin_value(w);
    if (!(std::abs(w0) <= origin_tolerance))
        throw Error(ErrorKind::precondition,
                    std::string(who) + ": map is not normalised, |w(0)| = " + std::to_string(std::abs(w0))
                        + " (compose with the disk automorphism sending w(0) to 0)");
}

/// p o w with p the automorphism sending w(0) to 0.
inline MapField normalize_origin(const MapField& w)
{
    const cplx w0 = origin_value(w);
    if (!(std::abs(w0) < 1.0))
        throw Error(ErrorKind::invalid_map, "normalize_origin: |w(0)| >= 1");
    const auto p = geometry::DiskAutomorphism::to_zero(w0);
    MapField out(w.grid);
    for (std::size_t i = 0; i < w.values.size(); ++i)
        out.values[i] = p(w.values[i]);
    for (std::size_t a = 0; a < w.boundary.size(); ++a)
        out.boundary[a] = p(w.boundary[a]);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Distortion bounds for normalised K-quasiconformal self-maps

inline CheckRecord mori_check(const MapField& w, double K)
{
    if (!(K >= 1.0) || !std::isfinite(K))
        throw Error(ErrorKind::usage, "mori_check: K must be a finite number >= 1");
    require_normalized(w, "mori_check");
    const double c = std::pow(4.0, 1.0 - 1.0 / K);

    CheckRecord rec;
    rec.name = "mori";
    rec.inequality = "|z/4^(1-1/K)|^K <= |w(z)| <= 4^(1-1/K)|z|^(1/K)";
    rec.slack = std::numeric_limits<double>::infinity();
    auto visit = [&](cplx z, cplx wz) {
        const double r = std::abs(z);
        const double lower = std::pow(r / c, K);
        const double upper = c * std::pow(r, 1.0 / K);
        const double m = std::abs(wz);
        const double s = std::min(m - lower, upper - m);
        if (s < rec.slack) {
            rec.slack = s;
            rec.value = m;
            rec.bound = (m - lower < upper - m) ? lower : upper;
            rec.where = z;
        }
    };
    const DiskGrid& g = w.grid;
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a)
            visit(g.node(j, a), w.at(j, a));
    for (int a = 0; a < g.ntheta(); ++a)
        visit(g.rim(a), w.boundary[a]);
    rec.passed = rec.slack >= -1e-10;
    rec.note = "K = " + std::to_string(K);
    return rec;
}

struct DistortionRatio {
    double sup = 1.0;        // sup (1 - |z|^2)/(1 - |w|^2), origin value 1 included
    cplx argmax{};
    double boundary_limit = 0.0; // sup over angles of the ratio extrapolated to |z| = 1
};

inline DistortionRatio distortion_ratio(const MapField& w)
{
    require_normalized(w, "distortion_ratio");
    const DiskGrid& g = w.grid;
    DistortionRatio out;
    auto ratio = [&](int j, int a) {
        const double m = std::abs(w.at(j, a));
        if (!(m < 1.0))
            throw Error(ErrorKind::invalid_map, "distortion_ratio: |w| >= 1 at an interior node");
        const double r = g.radius(j);
        return (1.0 - r * r) / (1.0 - m * m);
    };
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a) {
            const double q = ratio(j, a);
            if (q > out.sup) {
                out.sup = q;
                out.argmax = g.node(j, a);
            }
        }
    if (g.nr() >= 3) {
        const int n = g.nr();
        const std::array<double, 3> x{g.radius(n - 3), g.radius(n - 2), g.radius(n - 1)};
        std::array<double, 3> l;
        for (int q = 0; q < 3; ++q) {
            l[q] = 1.0;
            for (int p = 0; p < 3; ++p)
                if (p != q)
                    l[q] *= (1.0 - x[p]) / (x[q] - x[p]);
        }
        out.boundary_limit = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < g.ntheta(); ++a) {
            double v = 0.0;
            for (int q = 0; q < 3; ++q)
                v += l[q] * ratio(n - 3 + q, a);
            if (v > out.boundary_limit)
                out.boundary_limit = v;
            if (v > out.sup) {
                out.sup = v;
                out.argmax = g.rim(a);
            }
        }
    }
    return out;
}

/// rho_0 = 4^(1 - K^2 - K), the lower bound on |w| at |z| = 4^-K.
inline double rho0(double K)
{
    if (!(K >= 1.0))
        throw Error(ErrorKind::usage, "rho0: K must be >= 1");
    return std::pow(4.0, 1.0 - K * K - K);
}

/// Smallest admissible A > 0 in 4 A rho_0^2 / K^2 + 4 - 4 B K^2 >= 0; A = 1 when every A works.
inline double barrier_exponent(double B, double K)
{
    if (!(B >= 0.0))
        throw Error(ErrorKind::usage, "barrier_exponent: B must be >= 0");
    const double slack = 4.0 - 4.0 * B * K * K;
    if (slack >= 0.0)
        return 1.0;
    const double r0 = rho0(K);
    return (B * K * K - 1.0) * K * K / (r0 * r0);
}

/// Subharmonicity of phi = -1/A + exp(A(|w| - 1))/A on 4^-K <= |z| <= 1 - h, up to the stencil
/// allowance eps_h = 10 h^2 * (local sup of the scaled third differences of phi).
inline CheckRecord barrier_check(const MapField& w, double B, double K)
{
    if (!(K >= 1.0) || !std::isfinite(K))
        throw Error(ErrorKind::usage, "barrier_check: K must be a finite number >= 1");
    require_normalized(w, "barrier_check");
    const double A = barrier_exponent(B, K);
    const DiskGrid& g = w.grid;
    const int nr = g.nr();
    const int nt = g.ntheta();
    const double h = g.dr();

    NodeField phi(g.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        phi[i] = -1.0 / A + std::exp(A * (std::abs(w.values[i]) - 1.0)) / A;
    const NodeField lap = laplacian(g, phi);

    // Scaled third differences in r and theta at every node.
    RealField third(g.size(), 0.0);
    auto v = [&](int j, int a) { return phi[g.index(j, ((a % nt) + nt) % nt)].real(); };
    for (int j = 0; j < nr; ++j) {
        const double arc = g.radius(j) * g.dtheta();
        for (int a = 0; a < nt; ++a) {
            double t = std::abs(v(j, a + 2) - 3.0 * v(j, a + 1) + 3.0 * v(j, a) - v(j, a - 1))
                       / (arc * arc * arc);
            if (nr >= 4) {
                const int j0 = std::clamp(j - 1, 0, nr - 4);
                const double dr3 = std::abs(v(j0 + 3, a) - 3.0 * v(j0 + 2, a) + 3.0 * v(j0 + 1, a)
                                            - v(j0, a))
                                   / (h * h * h);
                t = std::max(t, dr3);
            }
            third[g.index(j, a)] = t;
        }
    }

    CheckRecord rec;
    rec.name = "barrier";
    rec.inequality = "Delta phi >= -eps_h on 4^(-K) <= |z| <= 1-h, phi = -1/A + exp(A(|w|-1))/A";
    rec.slack = std::numeric_limits<double>::infinity();
    const double inner = std::pow(4.0, -K);
    bool any = false;
    for (int j = 0; j < nr; ++j) {
        const double r = g.radius(j);
        if (r < inner || r > 1.0 - h)
            continue;
        for (int a = 0; a < nt; ++a) {
            double local = 0.0;
            for (int dj = -1; dj <= 1; ++dj)
                for (int da = -1; da <= 1; ++da) {
                    const int jj = std::clamp(j + dj, 0, nr - 1);
                    local = std::max(local, third[g.index(jj, ((a + da) % nt + nt) % nt)]);
                }
            const double eps = 10.0 * h * h * local;
            const double value = lap[g.index(j, a)].real();
            if (value + eps < rec.slack) {
                rec.slack = value + eps;
                rec.value = value;
                rec.bound = -eps;
                rec.where = g.node(j, a);
            }
            any = true;
        }
    }
    if (!any)
        rec.slack = 0.0;
    rec.passed = rec.slack >= 0.0;
    rec.note = "A = " + std::to_string(A) + ", B = " + std::to_string(B) + ", K = " + std::to_string(K)
               + ", rho0 = " + std::to_string(rho0(K));
    return rec;
}

// ---------------------------------------------------------------------------------------------
// Singular integral

/// I_p(z) = int_U ((1 - |w|^2) / (|z - w| |1 - conj(z) w|))^p dm(w).
///
/// Polar coordinates about z, w = z + s e^{i phi}, with s = s_max(phi) t^{1/(2-p)}; the
/// substitution absorbs the |z - w|^{-p} s ds singularity, leaving a bounded integrand in t.
/// Both levels use adaptive Gauss-Kronrod.
inline double singular_integral_Ip(cplx z, double p, double tolerance = 1e-10)
{
    if (!(std::abs(z) < 1.0))
        throw Error(ErrorKind::domain, "singular_integral_Ip: |z| must be < 1");
    if (!(p >= 1.0 && p < 2.0))
        throw Error(ErrorKind::usage, "singular_integral_Ip: p must lie in [1, 2)");
    using boost::math::quadrature::gauss_kronrod;
    const double e = 1.0 / (2.0 - p);
    const double one_minus = 1.0 - abs2(z);

    auto radial = [&](double phi) {
        const cplx dir = std::polar(1.0, phi);
        const double b = (std::conj(z) * dir).real();
        const double smax = -b + std::sqrt(b * b + one_minus);
        auto inner = [&](double t) {
            if (t <= 0.0)
                t = std::numeric_limits<double>::min();
            const double s = smax * std::pow(t, e);
            const cplx w = z + s * dir;
            const double num = std::max(0.0, 1.0 - abs2(w));
            const double den = std::abs(1.0 - std::conj(z) * w);
            // (num / (s den))^p * s * ds/dt, with ds/dt = e s / t written without the 1/t.
            return std::pow(num / den, p) * std::pow(smax, 2.0 - p) * e;
        };
        return gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 15, tolerance);
    };
    return gauss_kronrod<double, 61>::integrate(radial, 0.0, two_pi, 15, tolerance);
}

// ---------------------------------------------------------------------------------------------
// Hyperbolic energy density

struct EnergyField {
    RealField e;
    std::vector<std::size_t> blowup_nodes; // |w| >= 1 at an interior node
};

/// e(w) = (1 - |z|^2)^2 / (1 - |w|^2)^2 (|w_z|^2 + |w_zbar|^2) from supplied derivatives.
inline EnergyField hyperbolic_energy(const DiskGrid& grid, std::span<const cplx> values,
                                     std::span<const cplx> dz, std::span<const cplx> dzbar)
{
    EnergyField out;
    out.e.assign(grid.size(), std::numeric_limits<double>::infinity());
    for (int j = 0; j < grid.nr(); ++j) {
        const double r = grid.radius(j);
        for (int a = 0; a < grid.ntheta(); ++a) {
            const std::size_t i = grid.index(j, a);
            const double m2 = abs2(values[i]);
            if (!(m2 < 1.0)) {
                out.blowup_nodes.push_back(i);
                continue;
            }
            const double q = (1.0 - r * r) / (1.0 - m2);
            out.e[i] = q * q * (abs2(dz[i]) + abs2(dzbar[i]));
        }
    }
    return out;
}

inline EnergyField hyperbolic_energy(const MapField& w)
{
    const WirtingerPair d = wirtinger_derivatives(w);
    return hyperbolic_energy(w.grid, w.values, d.dz, d.dzbar);
}

// ---------------------------------------------------------------------------------------------
// Growth of the Laplacian

struct GrowthConstants {
    double B_est = 0.0;   // sup |Delta w| / (|grad w|^2 + |w|)
    bool B_unbounded = false;
    double a_est = 0.0;   // sup over |grad w|^2 >= 1 of |Delta w| / |grad w|^2
    double b_est = 0.0;   // sup over the rest of |Delta w| - a_est |grad w|^2
    double B_lemma = 0.0; // sup |Delta w| / |grad w|^2
};

/// |grad w| is the operator norm |w_z| + |w_zbar|. The first `skip_inner` rings are left out:
/// their stencils cross the origin and assume the field is smooth there.
inline GrowthConstants laplacian_growth_constants(const MapField& w, int skip_inner = 2)
{
    const FieldJet jet = field_jet(w);
    const DiskGrid& g = w.grid;
    GrowthConstants out;
    std::vector<std::size_t> low;
    for (int j = std::max(0, skip_inner); j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a) {
            const std::size_t i = g.index(j, a);
            const double lap = std::abs(jet.laplacian[i]);
            const double L = std::abs(jet.dz[i]) + std::abs(jet.dzbar[i]);
            const double L2 = L * L;
            const double den = L2 + std::abs(w.values[i]);
            if (den > 0.0)
                out.B_est = std::max(out.B_est, lap / den);
            if (L2 > 0.0)
                out.B_lemma = std::max(out.B_lemma, lap / L2);
            if (L2 >= 1.0)
                out.a_est = std::max(out.a_est, lap / L2);
            else
                low.push_back(i);
        }
    for (std::size_t i : low) {
        const double L = std::abs(jet.dz[i]) + std::abs(jet.dzbar[i]);
        out.b_est = std::max(out.b_est, std::abs(jet.laplacian[i]) - out.a_est * L * L);
    }
    return out;
}

/// Estimates on the finer of two grids; B is flagged unbounded when it at least doubles.
inline GrowthConstants laplacian_growth_constants(const MapField& coarse, const MapField& fine,
                                                  int skip_inner = 2)
{
    const GrowthConstants c = laplacian_growth_constants(coarse, skip_inner);
    GrowthConstants f = laplacian_growth_constants(fine, skip_inner);
    f.B_unbounded = f.B_est >= 2.0 * c.B_est && f.B_est > 0.0;
    return f;
}

} // namespace harmap
