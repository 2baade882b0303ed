#pragma once

// Subcommand orchestration: obtains the map a config describes, runs the requested analysis and
// writes the result files. Exit statuses: 0 success, 1 input/usage/io error, 2 solver
// divergence, 3 failed inequality check.

#include <harmap/core.hpp>
#include <harmap/diagnostics.hpp>
#include <harmap/disk_geometry.hpp>
#include <harmap/fixtures.hpp>
#include <harmap/grid.hpp>
#include <harmap/interpolate.hpp>
#include <harmap/io.hpp>
#include <harmap/metrics.hpp>
#include <harmap/potentials.hpp>
#include <harmap/rescaling.hpp>
#include <harmap/solver.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace harmap::cli {

enum ExitStatus : int { exit_ok = 0, exit_input = 1, exit_divergence = 2, exit_check_failed = 3 };

inline int exit_status_for(ErrorKind kind) noexcept
{
    return kind == ErrorKind::divergence ? exit_divergence : exit_input;
}

struct RunResult {
    int status = exit_ok;
    std::vector<std::filesystem::path> files;
    std::string message;
};

namespace detail {

using io::fmt;

class OutputDir {
public:
    explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir))
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw Error(ErrorKind::io, "cannot create output directory '" + dir_.string() + "'");
    }

    std::filesystem::path write(const std::string& name, const std::string& content)
    {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
        out << content;
        if (!out)
            throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
        files_.push_back(path);
        return path;
    }

    const std::vector<std::filesystem::path>& files() const noexcept { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
};

inline std::string field_csv(const MapField& w)
{
    std::ostringstream s;
    io::write_field_csv(s, w);
    return s.str();
}

inline std::string history_csv(const SolveReport& r)
{
    std::ostringstream s;
    s << "iteration,update\n";
    for (std::size_t i = 0; i < r.history.size(); ++i)
        s << i + 1 << ',' << fmt(r.history[i]) << '\n';
    return s.str();
}

inline std::string solve_report_text(const io::RunConfig& cfg, const SolveReport& r)
{
    std::ostringstream s;
    s << "metric: " << to_string(cfg.metric) << '\n'
      << "grid: " << cfg.nr << " x " << cfg.ntheta << '\n'
      << "refinement_levels: " << cfg.solver.refinement_levels << '\n'
      << "converged: " << (r.converged ? "yes" : "no") << '\n'
      << "iterations: " << r.iterations << '\n'
      << "final_update: " << fmt(r.final_update) << '\n'
      << "tolerance: " << fmt(cfg.solver.tolerance) << '\n'
      << "damping: " << fmt(cfg.solver.damping) << '\n';
    if (r.converged) {
        s << "residual: " << fmt(r.residual) << '\n';
        for (std::size_t l = 0; l < r.level_residuals.size(); ++l)
            s << "residual_level_" << l << ": " << fmt(r.level_residuals[l]) << '\n';
        s << "monotone_after_3: " << (r.monotone_after(3) ? "yes" : "no") << '\n';
    }
    return s.str();
}

inline std::string raster(const MapField& w)
{
    std::ostringstream s;
    io::write_magnitude_pgm(s, w, 128);
    return s.str();
}

// The map a diagnose or rescale run works on. A divergent solve still leaves its history behind.
inline MapField acquire_map(const io::RunConfig& cfg, OutputDir& out)
{
    switch (cfg.source) {
    case io::MapSource::alpha: return example_map_alpha(cfg.alpha, cfg.make_grid());
    case io::MapSource::field: {
        MapField w = io::import_field(cfg.field_path);
        if (w.grid.nr() < 5)
            throw Error(ErrorKind::input, "map.field: grid needs at least 5 rings");
        return w;
    }
    case io::MapSource::solve: break;
    }
    try {
        auto [w, report] = solve(cfg.make_metric(), cfg.make_boundary(), cfg.make_grid(), cfg.solver);
        out.write("history.csv", history_csv(report));
        out.write("solve_report.txt", solve_report_text(cfg, report));
        return std::move(w);
    } catch (const DivergenceError& e) {
        out.write("history.csv", history_csv(e.report()));
        out.write("solve_report.txt", solve_report_text(cfg, e.report()));
        throw;
    }
}

// Same map on the grid with half the resolution in each direction, when that grid is usable.
inline std::optional<MapField> coarsened(const io::RunConfig& cfg, const MapField& w)
{
    const int nr = w.grid.nr() / 2;
    const int nt = w.grid.ntheta() / 2;
    if (nr < 5 || nt < 8 || nt % 2 != 0)
        return std::nullopt;
    const DiskGrid g(nr, nt);
    if (cfg.source == io::MapSource::alpha)
        return sample(g, [alpha = cfg.alpha](cplx z) { return std::pow(std::abs(z), alpha) * z; });
    const SmoothInterpolant interp(w);
    return sample(g, [&](cplx z) { return interp(z); });
}

inline CheckRecord info(std::string name, double value, std::string note)
{
    CheckRecord r;
    r.name = std::move(name);
    r.value = value;
    r.bound = std::numeric_limits<double>::quiet_NaN();
    r.slack = std::numeric_limits<double>::quiet_NaN();
    r.note = std::move(note);
    return r;
}

inline std::string diagnostics_csv(const DiagnosticsReport& rep)
{
    std::ostringstream s;
    s << "name,status,value,bound,slack,where_re,where_im,inequality,note\n";
    for (const auto& r : rep.records) {
        const char* status = r.inequality.empty() ? "info" : (r.passed ? "pass" : "fail");
        s << r.name << ',' << status << ',' << fmt(r.value) << ',' << fmt(r.bound) << ','
          << fmt(r.slack) << ',' << fmt(r.where.real()) << ',' << fmt(r.where.imag()) << ",\""
          << r.inequality << "\",\"" << r.note << "\"\n";
    }
    return s.str();
}

inline std::string diagnostics_summary(const DiagnosticsReport& rep)
{
    std::ostringstream s;
    for (const auto& r : rep.records) {
        const char* status = r.inequality.empty() ? "info" : (r.passed ? "pass" : "fail");
        s << r.name << ": " << status << ", value = " << fmt(r.value);
        if (!r.inequality.empty())
            s << ", bound = " << fmt(r.bound) << ", slack = " << fmt(r.slack);
        if (!r.note.empty())
            s << " (" << r.note << ')';
        s << '\n';
    }
    s << "all_checks_passed: " << (rep.all_passed() ? "yes" : "no") << '\n';
    return s.str();
}

inline DiagnosticsReport diagnose_map(const io::RunConfig& cfg, const MapField& w)
{
    const ConformalMetric metric = cfg.make_metric();
    const DiskGrid& g = w.grid;
    DiagnosticsReport rep;

    const DilatationField dil = dilatation_field(w);
    {
        CheckRecord r;
        r.name = "dilatation_k";
        r.inequality = "sup |w_zbar|/|w_z| < 1";
        r.value = dil.sup_k;
        r.bound = 1.0;
        r.slack = 1.0 - dil.sup_k;
        r.passed = dil.sup_k < 1.0 && dil.orientation_reversed.empty();
        r.where = g.node(static_cast<int>(dil.argmax / g.ntheta()), static_cast<int>(dil.argmax % g.ntheta()));
        r.note = "singular nodes excluded: " + std::to_string(dil.singular_nodes.size());
        rep.add(r);
    }
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int j = std::min(2, g.nr() - 1); j < g.nr(); ++j)
            for (int a = 0; a < g.ntheta(); ++a) {
                const double K = dil.K[g.index(j, a)];
                if (std::isnan(K))
                    continue;
                lo = std::min(lo, K);
                hi = std::max(hi, K);
            }
        const bool constant = hi - lo <= 1e-6 * hi;
        rep.add(info("dilatation_K", dil.sup_K,
                     "K over rings >= 2 in [" + fmt(lo) + ", " + fmt(hi) + "]"
                         + (constant ? ", constant" : "")));
    }

    const BilipschitzEstimate bl = bilipschitz_estimate(w);
    {
        CheckRecord r = info("bilipschitz_inf_l", bl.inf_l,
                             "sup L = " + fmt(bl.sup_L) + ", innermost ring inf l = " + fmt(bl.ring_inf_l[0])
                                 + ", bi-Lipschitz: " + (bl.bilipschitz ? "yes" : "no"));
        r.where = bl.argmin;
        rep.add(r);
    }

    const NodeField psi = hopf_differential(metric, w);
    rep.add(info("hopf_holomorphy_residual", holomorphy_residual(g, psi), "sup |d Psi/d zbar|"));

    const double w0 = std::abs(origin_value(w));
    rep.add(info("origin_value", w0, "checks below use the map composed with the automorphism sending w(0) to 0"));
    const MapField wn = normalize_origin(w);

    const std::optional<MapField> coarse = coarsened(cfg, w);
    GrowthConstants gc = coarse ? laplacian_growth_constants(normalize_origin(*coarse), wn)
                                : laplacian_growth_constants(wn);
    const std::string pair_note = coarse ? "coarse/fine pair" : "single grid, unboundedness not tested";
    rep.add(info("growth_B", gc.B_est,
                 pair_note + ", unbounded: " + (gc.B_unbounded ? "yes" : "no")));
    rep.add(info("growth_a", gc.a_est, "sup |Delta w|/|grad w|^2 where |grad w| >= 1"));
    rep.add(info("growth_b", gc.b_est, "sup |Delta w| - a |grad w|^2 where |grad w| < 1"));
    rep.add(info("growth_B_lemma", gc.B_lemma, "sup |Delta w|/|grad w|^2"));

    const double K = dil.sup_K;
    if (std::isfinite(K)) {
        rep.add(mori_check(wn, K));
    } else {
        CheckRecord r;
        r.name = "mori";
        r.inequality = "K finite";
        r.value = K;
        r.passed = false;
        rep.add(r);
    }

    {
        const DistortionRatio dr = distortion_ratio(wn);
        CheckRecord r;
        r.name = "distortion_ratio";
        r.inequality = "sup (1-|z|^2)/(1-|w|^2) finite";
        r.value = dr.sup;
        r.bound = std::numeric_limits<double>::infinity();
        r.slack = std::numeric_limits<double>::infinity();
        r.passed = std::isfinite(dr.sup);
        r.where = dr.argmax;
        r.note = "boundary limit = " + fmt(dr.boundary_limit);
        rep.add(r);
    }

    if (!std::isfinite(K)) {
        CheckRecord r;
        r.name = "barrier";
        r.inequality = "K finite";
        r.value = K;
        r.passed = false;
        rep.add(r);
    } else if (gc.B_unbounded) {
        rep.add(info("barrier", gc.B_est, "not applicable: B flagged unbounded"));
    } else {
        rep.add(barrier_check(wn, gc.B_est, K));
    }
    return rep;
}

inline std::string rescale_csv(const LemmaReport& rep)
{
    std::ostringstream s;
    s << "n,zn_re,zn_im,origin,C1,C2,C3,C3_skipped,hopf\n";
    for (std::size_t n = 0; n < rep.members.size(); ++n) {
        const MemberBounds& m = rep.members[n];
        s << n + 1 << ',' << fmt(m.zn.real()) << ',' << fmt(m.zn.imag()) << ',' << fmt(m.origin) << ','
          << fmt(m.C1) << ',' << fmt(m.C2) << ',' << fmt(m.C3) << ',' << (m.C3_skipped ? 1 : 0) << ','
          << fmt(m.hopf) << '\n';
    }
    return s.str();
}

inline bool rescale_passed(const LemmaReport& rep)
{
    return rep.normalized && rep.C1_uniform && rep.C2_uniform && rep.C3_uniform && rep.hopf_uniform;
}

inline std::string rescale_summary(const LemmaReport& rep)
{
    auto yn = [](bool b) { return b ? "yes" : "no"; };
    std::ostringstream s;
    s << "members: " << rep.members.size() << '\n'
      << "normalized: " << yn(rep.normalized) << '\n'
      << "C1: " << fmt(rep.C1) << ", uniform: " << yn(rep.C1_uniform) << '\n'
      << "C2: " << fmt(rep.C2) << ", uniform: " << yn(rep.C2_uniform) << '\n'
      << "C3: " << fmt(rep.C3) << ", uniform: " << yn(rep.C3_uniform) << '\n'
      << "hopf: " << fmt(rep.hopf) << ", uniform: " << yn(rep.hopf_uniform) << '\n'
      << "all_checks_passed: " << yn(rescale_passed(rep)) << '\n';
    return s.str();
}

// ---------------------------------------------------------------------------------------------
// Kernel self-test

struct KernelCheck {
    std::string identity;
    cplx z;
    double value = 0.0;
    double expected = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
};

inline std::vector<KernelCheck> kernel_checks()
{
    using namespace geometry;
    const std::array<cplx, 6> pts{cplx(0.0, 0.0), cplx(0.3, 0.1), cplx(-0.5, 0.4), cplx(0.1, -0.7),
                                  cplx(0.85, 0.2), cplx(-0.6, -0.6)};
    const std::array<cplx, 6> partners{cplx(0.2, -0.3), cplx(-0.4, 0.5), cplx(0.6, 0.1), cplx(0.0, 0.9),
                                       cplx(-0.3, -0.2), cplx(0.5, 0.5)};
    std::vector<KernelCheck> out;
    auto add = [&](std::string name, cplx z, double value, double expected, double tol) {
        out.push_back({std::move(name), z, value, expected, std::abs(value - expected), tol});
    };

    for (cplx z : pts) {
        const int n = 2048;
        double s = 0.0;
        for (int a = 0; a < n; ++a)
            s += poisson_kernel(z, two_pi * a / n);
        add("poisson_mean_one", z, s / n, 1.0, 1e-10);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        add("green_symmetry", pts[i], green(pts[i], partners[i]), green(partners[i], pts[i]), 1e-12);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const cplx z = pts[i], w = partners[i];
        const double h = 1e-5;
        const double gx = (green(z + h, w) - green(z - h, w)) / (2.0 * h);
        const double gy = (green(z + cplx(0, h), w) - green(z - cplx(0, h), w)) / (2.0 * h);
        const cplx fd = 0.5 * cplx(gx, -gy);
        add("green_dz_finite_difference", z, std::abs(green_dz(z, w)), std::abs(fd),
            1e-6 * (1.0 + std::abs(fd)));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const cplx z = pts[i], w = partners[i];
        add("green_dzbar_conjugate", z, std::abs(green_dzbar(z, w) - std::conj(green_dz(z, w))), 0.0, 1e-14);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const cplx c = partners[i];
        const auto p = DiskAutomorphism::to_zero(c);
        add("automorphism_inverse", pts[i], std::abs(p.inverse()(p(pts[i])) - pts[i]), 0.0, 1e-13);
        add("automorphism_center_to_zero", c, std::abs(p(c)), 0.0, 1e-15);
        const double h = 1e-5;
        const cplx fd = (p(pts[i] + h) - p(pts[i] - h)) / (2.0 * h);
        add("automorphism_derivative", pts[i], std::abs(p.derivative(pts[i], 1)), std::abs(fd), 1e-8);
        const double expected = (1.0 - abs2(c)) / abs2(1.0 - std::conj(c) * pts[i]);
        add("automorphism_derivative_modulus", pts[i], std::abs(p.derivative(pts[i], 1)), expected, 1e-13);
    }
    {
        // G[4] = 1 - |z|^2 on a small grid, second order in h.
        const DiskGrid g(16, 32);
        const NodeField four(g.size(), cplx(4.0, 0.0));
        const NodeField u = GreenOperator(g).apply(four);
        for (int j : {0, 7, 15}) {
            const cplx z = g.node(j, 3);
            add("green_potential_of_constant", z, u[g.index(j, 3)].real(), 1.0 - abs2(z), 2e-3);
        }
    }
    return out;
}

inline std::string kernels_csv(const std::vector<KernelCheck>& checks)
{
    std::ostringstream s;
    s << "identity,z_re,z_im,value,expected,error,tolerance,status\n";
    for (const auto& c : checks)
        s << c.identity << ',' << fmt(c.z.real()) << ',' << fmt(c.z.imag()) << ',' << fmt(c.value) << ','
          << fmt(c.expected) << ',' << fmt(c.error) << ',' << fmt(c.tolerance) << ','
          << (c.error <= c.tolerance ? "pass" : "fail") << '\n';
    return s.str();
}

} // namespace detail

/// Runs one subcommand. Library errors propagate; `run_guarded` maps them onto exit statuses.
inline RunResult run(const io::RunConfig& cfg, std::optional<std::filesystem::path> out_override = {})
{
    detail::OutputDir out(out_override.value_or(cfg.out_dir));
    RunResult res;
    switch (cfg.subcommand) {
    case io::Subcommand::solve: {
        const MapField w = detail::acquire_map(cfg, out);
        out.write("field.csv", detail::field_csv(w));
        if (cfg.raster)
            out.write("field.pgm", detail::raster(w));
        break;
    }
    case io::Subcommand::diagnose: {
        const MapField w = detail::acquire_map(cfg, out);
        const DiagnosticsReport rep = detail::diagnose_map(cfg, w);
        out.write("diagnostics.csv", detail::diagnostics_csv(rep));
        out.write("summary.txt", detail::diagnostics_summary(rep));
        if (cfg.raster)
            out.write("field.pgm", detail::raster(w));
        if (!rep.all_passed()) {
            res.status = exit_check_failed;
            res.message = "diagnose: at least one inequality check failed";
        }
        break;
    }
    case io::Subcommand::rescale: {
        const MapField w = detail::acquire_map(cfg, out);
        const BlowupFamily fam = build_family(w, default_sequence(cfg.count, cfg.theta0));
        const LemmaReport rep = lemma_bounds_check(fam, cfg.make_metric());
        out.write("rescale.csv", detail::rescale_csv(rep));
        out.write("summary.txt", detail::rescale_summary(rep));
        if (!detail::rescale_passed(rep)) {
            res.status = exit_check_failed;
            res.message = "rescale: bounds are not uniform across the family";
        }
        break;
    }
    case io::Subcommand::kernels: {
        const auto checks = detail::kernel_checks();
        out.write("kernels.csv", detail::kernels_csv(checks));
        for (const auto& c : checks)
            if (!(c.error <= c.tolerance)) {
                res.status = exit_check_failed;
                res.message = "kernels: identity '" + c.identity + "' failed";
                break;
            }
        break;
    }
    }
    res.files = out.files();
    return res;
}

/// Parses the config at `config_path` and runs `subcommand`, reporting errors on `err`.
inline int run_guarded(io::Subcommand subcommand, const std::filesystem::path& config_path,
                       std::optional<std::filesystem::path> out_dir, std::ostream& err)
{
    try {
        const io::RunConfig cfg = io::load_config(config_path, subcommand);
        const RunResult res = run(cfg, out_dir);
        if (!res.message.empty())
            err << res.message << '\n';
        return res.status;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return exit_status_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    }
}

} // namespace harmap::cli
