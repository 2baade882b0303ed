#pragma once

// Run configuration and file formats: flat key = value configs, node CSVs, PGM rasters.

#include <harmap/core.hpp>
#include <harmap/grid.hpp>
#include <harmap/interpolate.hpp>
#include <harmap/metrics.hpp>
#include <harmap/solver.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace harmap::io {

enum class Subcommand { solve, diagnose, rescale, kernels };
enum class MapSource { solve, alpha, field };

inline std::optional<Subcommand> parse_subcommand(std::string_view s)
{
    if (s == "solve") return Subcommand::solve;
    if (s == "diagnose") return Subcommand::diagnose;
    if (s == "rescale") return Subcommand::rescale;
    if (s == "kernels") return Subcommand::kernels;
    return std::nullopt;
}

inline const char* to_string(Subcommand s)
{
    switch (s) {
    case Subcommand::solve: return "solve";
    case Subcommand::diagnose: return "diagnose";
    case Subcommand::rescale: return "rescale";
    case Subcommand::kernels: return "kernels";
    }
    return "?";
}

struct RunConfig {
    Subcommand subcommand = Subcommand::solve;
    MetricKind metric = MetricKind::euclidean;
    double c0 = 1.0, c1 = 0.0, c2 = 0.0;
    std::vector<double> sin_coeffs; // boundary.a1, a2, ...
    std::vector<double> cos_coeffs; // boundary.b1, b2, ...
    int nr = 64;
    int ntheta = 128;
    SolverConfig solver;
    MapSource source = MapSource::solve;
    double alpha = 1.0;
    std::string field_path;
    double theta0 = 0.0;
    int count = 6;
    bool raster = false;
    std::string out_dir = ".";

    ConformalMetric make_metric() const
    {
        switch (metric) {
        case MetricKind::euclidean: return ConformalMetric::euclidean();
        case MetricKind::spherical: return ConformalMetric::spherical();
        case MetricKind::hyperbolic: return ConformalMetric::hyperbolic();
        case MetricKind::radial_catalog: return ConformalMetric::radial_catalog(c0, c1, c2);
        }
        return ConformalMetric::euclidean();
    }

    BoundaryMap make_boundary() const { return BoundaryMap(sin_coeffs, cos_coeffs); }
    DiskGrid make_grid() const { return DiskGrid(nr, ntheta); }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void bad_key(const std::string& key, const std::string& why)
{
    throw Error(ErrorKind::input, "config key '" + key + "': " + why);
}

inline double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        bad_key(key, "expected a finite number, got '" + v + "'");
    return out;
}

inline int to_int(const std::string& key, const std::string& v)
{
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        bad_key(key, "expected an integer, got '" + v + "'");
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    bad_key(key, "expected true or false, got '" + v + "'");
}

// boundary.a<k> / boundary.b<k> with k >= 1; returns k or 0.
inline int coefficient_index(const std::string& key, char family)
{
    const std::string prefix = std::string("boundary.") + family;
    if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size())
        return 0;
    int k = 0;
    const char* first = key.data() + prefix.size();
    const char* last = key.data() + key.size();
    const auto res = std::from_chars(first, last, k);
    if (res.ec != std::errc() || res.ptr != last || k < 1)
        return 0;
    return k;
}

} // namespace detail

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, duplicates and out-of-range
/// values are rejected with a message naming the key.
inline RunConfig parse_config(std::string_view text, Subcommand subcommand)
{
    RunConfig cfg;
    cfg.subcommand = subcommand;
    std::map<std::string, std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::input,
                        "config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
            throw Error(ErrorKind::input, "config line " + std::to_string(line_no) + ": empty key");
        if (value.empty())
            detail::bad_key(key, "missing value");
        if (!seen.emplace(key, value).second)
            detail::bad_key(key, "given more than once");

        if (key == "metric.kind") {
            if (value == "euclidean") cfg.metric = MetricKind::euclidean;
            else if (value == "spherical") cfg.metric = MetricKind::spherical;
            else if (value == "hyperbolic") cfg.metric = MetricKind::hyperbolic;
            else if (value == "radial_catalog") cfg.metric = MetricKind::radial_catalog;
            else detail::bad_key(key, "unknown metric '" + value + "'");
        } else if (key == "metric.c0") {
            cfg.c0 = detail::to_double(key, value);
        } else if (key == "metric.c1") {
            cfg.c1 = detail::to_double(key, value);
        } else if (key == "metric.c2") {
            cfg.c2 = detail::to_double(key, value);
        } else if (int k = detail::coefficient_index(key, 'a'); k > 0) {
            if (cfg.sin_coeffs.size() < static_cast<std::size_t>(k))
                cfg.sin_coeffs.resize(k, 0.0);
            cfg.sin_coeffs[k - 1] = detail::to_double(key, value);
        } else if (int k = detail::coefficient_index(key, 'b'); k > 0) {
            if (cfg.cos_coeffs.size() < static_cast<std::size_t>(k))
                cfg.cos_coeffs.resize(k, 0.0);
            cfg.cos_coeffs[k - 1] = detail::to_double(key, value);
        } else if (key == "grid.nr") {
            cfg.nr = detail::to_int(key, value);
        } else if (key == "grid.ntheta") {
            cfg.ntheta = detail::to_int(key, value);
        } else if (key == "solver.tol") {
            cfg.solver.tolerance = detail::to_double(key, value);
        } else if (key == "solver.max_iterations") {
            cfg.solver.max_iterations = detail::to_int(key, value);
        } else if (key == "solver.damping") {
            cfg.solver.damping = detail::to_double(key, value);
        } else if (key == "solver.refinement_levels") {
            cfg.solver.refinement_levels = detail::to_int(key, value);
        } else if (key == "map.source") {
            if (value == "solve") cfg.source = MapSource::solve;
            else if (value == "alpha") cfg.source = MapSource::alpha;
            else if (value == "field") cfg.source = MapSource::field;
            else detail::bad_key(key, "expected solve, alpha or field");
        } else if (key == "map.alpha") {
            cfg.alpha = detail::to_double(key, value);
        } else if (key == "map.field") {
            cfg.field_path = value;
        } else if (key == "rescale.theta0") {
            cfg.theta0 = detail::to_double(key, value);
        } else if (key == "rescale.count") {
            cfg.count = detail::to_int(key, value);
        } else if (key == "output.raster") {
            cfg.raster = detail::to_bool(key, value);
        } else if (key == "output.dir") {
            cfg.out_dir = value;
        } else {
            detail::bad_key(key, "unknown key");
        }
    }

    // Invariants, checked before any computation.
    if (cfg.nr < 5)
        detail::bad_key("grid.nr", "must be >= 5");
    if (cfg.ntheta < 8 || cfg.ntheta % 2 != 0)
        detail::bad_key("grid.ntheta", "must be an even number >= 8");
    try {
        cfg.solver.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::input, "config: " + e.message());
    }
    if (cfg.metric == MetricKind::radial_catalog) {
        try {
            (void)cfg.make_metric();
        } catch (const Error& e) {
            throw Error(ErrorKind::input, "config key 'metric.c0..c2': " + e.message());
        }
    } else if (seen.count("metric.c0") || seen.count("metric.c1") || seen.count("metric.c2")) {
        detail::bad_key("metric.c0", "coefficients apply to metric.kind = radial_catalog only");
    }
    try {
        (void)cfg.make_boundary();
    } catch (const Error& e) {
        throw Error(ErrorKind::input, "config key 'boundary': " + e.message());
    }
    const bool needs_map = subcommand != Subcommand::kernels;
    if (needs_map && cfg.source == MapSource::solve && cfg.metric == MetricKind::hyperbolic)
        detail::bad_key("metric.kind",
                        "hyperbolic metric fails the approximate-analyticity gate required by the solver");
    if (needs_map && cfg.source == MapSource::alpha && !(cfg.alpha > 0.0))
        detail::bad_key("map.alpha", "must be > 0");
    if (needs_map && cfg.source == MapSource::field && cfg.field_path.empty())
        detail::bad_key("map.field", "required when map.source = field");
    if (subcommand == Subcommand::solve && cfg.source != MapSource::solve)
        detail::bad_key("map.source", "the solve subcommand always solves");
    if (cfg.count < 1)
        detail::bad_key("rescale.count", "must be >= 1");
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, Subcommand subcommand)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config(ss.str(), subcommand);
    // Relative paths inside a config are relative to the config file.
    if (!cfg.field_path.empty() && std::filesystem::path(cfg.field_path).is_relative())
        cfg.field_path = (path.parent_path() / cfg.field_path).lexically_normal().string();
    return cfg;
}

// ---------------------------------------------------------------------------------------------
// Number formatting

/// Shortest-stable text for a double: 17 significant digits.
inline std::string fmt(double v)
{
    if (v == 0.0)
        v = 0.0; // drop the sign of negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------------------------
// Field CSV

/// Header `r,theta,re,im`; one row per interior node, radius-major.
inline void write_field_csv(std::ostream& out, const MapField& w)
{
    if (w.values.empty() || w.values.size() != w.grid.size())
        throw Error(ErrorKind::input, "export_field: field has no nodes");
    out << "r,theta,re,im\n";
    const DiskGrid& g = w.grid;
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a) {
            const cplx v = w.at(j, a);
            out << fmt(g.radius(j)) << ',' << fmt(g.angle(a)) << ',' << fmt(v.real()) << ','
                << fmt(v.imag()) << '\n';
        }
}

inline void export_field(const MapField& w, const std::filesystem::path& path)
{
    if (w.values.empty() || w.values.size() != w.grid.size())
        throw Error(ErrorKind::input, "export_field: field has no nodes");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    write_field_csv(out, w);
    if (!out)
        throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

/// Reads a field CSV. The grid is recovered from the row layout; rim values are extrapolated
/// quadratically from the three outermost rings.
inline MapField read_field_csv(std::istream& in, const std::string& name = "field")
{
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "r,theta,re,im")
        throw Error(ErrorKind::input, name + ": expected header 'r,theta,re,im'");
    std::vector<double> rs, ts;
    std::vector<cplx> vals;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = detail::trim(line);
        if (body.empty())
            continue;
        double f[4];
        std::size_t pos = 0;
        for (int c = 0; c < 4; ++c) {
            const std::size_t end = c < 3 ? body.find(',', pos) : body.size();
            if (end == std::string::npos)
                throw Error(ErrorKind::input, name + " line " + std::to_string(line_no) + ": expected 4 columns");
            const auto res = std::from_chars(body.data() + pos, body.data() + end, f[c]);
            if (res.ec != std::errc() || res.ptr != body.data() + end || !std::isfinite(f[c]))
                throw Error(ErrorKind::input, name + " line " + std::to_string(line_no) + ": bad number");
            pos = end + 1;
        }
        rs.push_back(f[0]);
        ts.push_back(f[1]);
        vals.emplace_back(f[2], f[3]);
    }
    if (vals.empty())
        throw Error(ErrorKind::input, name + ": no data rows");
    int nt = 0;
    while (nt < static_cast<int>(rs.size()) && rs[nt] == rs[0])
        ++nt;
    if (nt < 2 || rs.size() % nt != 0)
        throw Error(ErrorKind::input, name + ": rows do not form a polar grid");
    const int nr = static_cast<int>(rs.size() / nt);
    const DiskGrid grid(nr, nt);
    for (int j = 0; j < nr; ++j)
        for (int a = 0; a < nt; ++a) {
            const std::size_t i = grid.index(j, a);
            if (std::abs(rs[i] - grid.radius(j)) > 1e-12 || std::abs(ts[i] - grid.angle(a)) > 1e-12)
                throw Error(ErrorKind::input, name + ": node " + std::to_string(i)
                                                  + " does not match the grid layout");
        }
    MapField w(grid);
    w.values = std::move(vals);
    if (nr >= 3) {
        const std::array<double, 3> x{grid.radius(nr - 3), grid.radius(nr - 2), grid.radius(nr - 1)};
        std::array<double, 3> l;
        for (int q = 0; q < 3; ++q) {
            l[q] = 1.0;
            for (int p = 0; p < 3; ++p)
                if (p != q)
                    l[q] *= (1.0 - x[p]) / (x[q] - x[p]);
        }
        for (int a = 0; a < nt; ++a)
            w.boundary[a] = l[0] * w.at(nr - 3, a) + l[1] * w.at(nr - 2, a) + l[2] * w.at(nr - 1, a);
    } else {
        for (int a = 0; a < nt; ++a)
            w.boundary[a] = w.at(nr - 1, a);
    }
    return w;
}

inline MapField import_field(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot read field file '" + path.string() + "'");
    return read_field_csv(in, path.filename().string());
}

// ---------------------------------------------------------------------------------------------
// Raster

/// |w| on a size x size raster of the square [-1, 1]^2 as a plain PGM; 0 outside the disk.
inline void write_magnitude_pgm(std::ostream& out, const MapField& w, int size)
{
    std::vector<double> mag(static_cast<std::size_t>(size) * size, 0.0);
    double top = 0.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const cplx z(-1.0 + 2.0 * (x + 0.5) / size, 1.0 - 2.0 * (y + 0.5) / size);
            if (std::abs(z) > 1.0)
                continue;
            const double m = std::abs(interpolate(w, z));
            mag[static_cast<std::size_t>(y) * size + x] = m;
            top = std::max(top, m);
        }
    out << "P2\n" << size << ' ' << size << "\n255\n";
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double m = mag[static_cast<std::size_t>(y) * size + x];
            const int level = top > 0.0 ? static_cast<int>(std::lround(255.0 * m / top)) : 0;
            out << level << (x + 1 < size ? ' ' : '\n');
        }
    }
}

} // namespace harmap::io
