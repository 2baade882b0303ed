#include <harmap/fixtures.hpp>
#include <harmap/grid.hpp>
#include <harmap/interpolate.hpp>
#include <harmap/potentials.hpp>
#include <harmap/solver.hpp>
#include <harmap/stencils.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace harmap;

namespace {

double sup_error(const DiskGrid& g, const NodeField& v, auto&& exact)
{
    double e = 0.0;
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a)
            e = std::max(e, std::abs(v[g.index(j, a)] - cplx(exact(g.node(j, a)))));
    return e;
}

std::vector<cplx> rim_samples(int m, auto&& f)
{
    std::vector<cplx> s(m);
    for (int a = 0; a < m; ++a)
        s[a] = f(two_pi * a / m);
    return s;
}

} // namespace

TEST(DiskGrid, LayoutAndWeights)
{
    const DiskGrid g(4, 8);
    EXPECT_DOUBLE_EQ(g.radius(0), 0.125);
    EXPECT_DOUBLE_EQ(g.radius(3), 0.875);
    EXPECT_EQ(g.index(1, 2), 10u);
    double area = 0.0;
    for (int j = 0; j < g.nr(); ++j)
        area += g.weight(j) * g.ntheta();
    EXPECT_NEAR(area, pi, 1e-14);
    EXPECT_THROW(DiskGrid(4, 7), Error);
    EXPECT_EQ(g.refined(), DiskGrid(8, 16));
}

TEST(BoundaryMap, HomeomorphismCheck)
{
    EXPECT_NO_THROW(BoundaryMap({0.2}, {}));
    try {
        BoundaryMap({2.0}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::input);
        EXPECT_NE(std::string(e.what()).find("homeomorphism check"), std::string::npos);
    }
    const BoundaryMap f({0.2}, {0.1});
    EXPECT_NEAR(f.phase(0.3), 0.3 + 0.2 * std::sin(0.3) + 0.1 * std::cos(0.3), 1e-15);
}

TEST(PoissonExtend, Identity)
{
    const DiskGrid g(16, 32);
    const MapField w = poisson_extend(BoundaryMap::identity(), g);
    EXPECT_LT(sup_error(g, w.values, [](cplx z) { return z; }), 1e-10);
}

TEST(PoissonExtend, ConstantAndMonomials)
{
    const DiskGrid g(16, 32);
    const cplx c(0.3, -0.2);
    const auto constant = poisson_extend(rim_samples(64, [&](double) { return c; }), g);
    EXPECT_LT(sup_error(g, constant.values, [&](cplx) { return c; }), 1e-14);
    const auto square = poisson_extend(rim_samples(64, [](double t) { return std::polar(1.0, 2.0 * t); }), g);
    EXPECT_LT(sup_error(g, square.values, [](cplx z) { return z * z; }), 1e-13);
    const auto conj = poisson_extend(rim_samples(64, [](double t) { return std::polar(1.0, -t); }), g);
    EXPECT_LT(sup_error(g, conj.values, [](cplx z) { return std::conj(z); }), 1e-13);
}

TEST(GreenPotential, ZeroSource)
{
    const DiskGrid g(8, 16);
    const MapField u = green_potential(NodeField(g.size(), 0.0), g);
    for (cplx v : u.values)
        EXPECT_EQ(v, cplx(0.0));
}

TEST(GreenPotential, ConstantSource)
{
    // Delta(|z|^2 - 1) = 4 with zero boundary values, so G[4] = 1 - |z|^2.
    for (int n : {8, 16, 32}) {
        const DiskGrid g(n, 2 * n);
        const MapField u = green_potential(NodeField(g.size(), 4.0), g);
        EXPECT_LT(sup_error(g, u.values, [](cplx z) { return 1.0 - std::norm(z); }), 1e-7) << n;
    }
}

TEST(GreenPotential, ConvergesForNonPolynomialSource)
{
    // u = (1 - |z|^2) e^x vanishes on the circle, so u = -G[Delta u] with
    // Delta u = e^x (1 - |z|^2 - 4 - 4x).
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const DiskGrid g(n, 2 * n);
        NodeField lap(g.size());
        for (int j = 0; j < g.nr(); ++j)
            for (int a = 0; a < g.ntheta(); ++a) {
                const cplx z = g.node(j, a);
                lap[g.index(j, a)] = std::exp(z.real()) * (1.0 - std::norm(z) - 4.0 - 4.0 * z.real());
            }
        const MapField gu = green_potential(lap, g);
        NodeField u(g.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = -gu.values[i];
        const double e = sup_error(g, u, [](cplx z) { return (1.0 - std::norm(z)) * std::exp(z.real()); });
        EXPECT_LT(e, 1e-2);
        if (prev > 0.0) {
            EXPECT_GT(prev / e, 3.0) << n;
        }
        prev = e;
    }
}

TEST(GreenPotential, RadialSource)
{
    // -Delta u = r with u(1) = 0: u = (1 - r^3)/9.
    const DiskGrid g(32, 64);
    NodeField src(g.size());
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a)
            src[g.index(j, a)] = g.radius(j);
    const MapField u = green_potential(src, g);
    EXPECT_LT(sup_error(g, u.values, [](cplx z) { return (1.0 - std::pow(std::abs(z), 3)) / 9.0; }), 2e-4);
    for (cplx b : u.boundary)
        EXPECT_EQ(b, cplx(0.0));
}

TEST(RepresentationIdentity, ReproducesSmoothFields)
{
    // u = P[u|_circle] - G[Delta u].
    const DiskGrid g(32, 64);
    auto check = [&](auto&& u, auto&& lap) {
        NodeField src(g.size());
        for (int j = 0; j < g.nr(); ++j)
            for (int a = 0; a < g.ntheta(); ++a)
                src[g.index(j, a)] = lap(g.node(j, a));
        const MapField p = poisson_extend(rim_samples(4 * g.ntheta(), [&](double t) { return u(std::polar(1.0, t)); }), g);
        const MapField gp = green_potential(src, g);
        NodeField rep(g.size());
        for (std::size_t i = 0; i < rep.size(); ++i)
            rep[i] = p.values[i] - gp.values[i];
        return sup_error(g, rep, u);
    };
    EXPECT_LT(check([](cplx z) { return cplx(std::norm(z)); }, [](cplx) { return cplx(4.0); }), 5e-3);
    EXPECT_LT(check([](cplx z) { return cplx((z * z * z).real()); }, [](cplx) { return cplx(0.0); }), 1e-12);
    EXPECT_LT(check([](cplx z) { return z + 0.1 * std::conj(z) * std::conj(z); }, [](cplx) { return cplx(0.0); }),
              1e-12);
}

TEST(Wirtinger, LinearMaps)
{
    const DiskGrid g(16, 32);
    const auto id = wirtinger_derivatives(sample(g, [](cplx z) { return z; }));
    const auto cj = wirtinger_derivatives(sample(g, [](cplx z) { return std::conj(z); }));
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(std::abs(id.dz[i] - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(id.dzbar[i]), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(cj.dz[i]), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(cj.dzbar[i] - 1.0), 0.0, 1e-12);
    }
}

TEST(Wirtinger, PolynomialFieldsAreExact)
{
    // w = z^2 conj(z): w_z = 2 z conj(z), w_zbar = z^2.
    const DiskGrid g(16, 32);
    const auto d = wirtinger_derivatives(sample(g, [](cplx z) { return z * z * std::conj(z); }));
    EXPECT_LT(sup_error(g, d.dz, [](cplx z) { return 2.0 * std::norm(z); }), 1e-12);
    EXPECT_LT(sup_error(g, d.dzbar, [](cplx z) { return z * z; }), 1e-12);
}

TEST(Wirtinger, SmoothFieldConvergesUnderRefinement)
{
    // w = z exp(conj z): w_z = exp(conj z), w_zbar = z exp(conj z).
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const DiskGrid g(n, 2 * n);
        const auto d = wirtinger_derivatives(sample(g, [](cplx z) { return z * std::exp(std::conj(z)); }));
        const double e = std::max(sup_error(g, d.dz, [](cplx z) { return std::exp(std::conj(z)); }),
                                  sup_error(g, d.dzbar, [](cplx z) { return z * std::exp(std::conj(z)); }));
        EXPECT_LT(e, 1e-2);
        if (prev > 0.0) {
            EXPECT_GT(prev / e, 3.0) << n;
        }
        prev = e;
    }
}

TEST(Laplacian, Examples)
{
    const DiskGrid g(16, 32);
    const NodeField sq = laplacian(sample(g, [](cplx z) { return cplx(std::norm(z)); }));
    const NodeField id = laplacian(sample(g, [](cplx z) { return z; }));
    EXPECT_LT(sup_error(g, sq, [](cplx) { return 4.0; }), 1e-10);
    EXPECT_LT(sup_error(g, id, [](cplx) { return 0.0; }), 1e-10);
    // Delta(|z|^2 z) = 8 z.
    const NodeField cubic = laplacian(sample(g, [](cplx z) { return std::norm(z) * z; }));
    EXPECT_LT(sup_error(g, cubic, [](cplx z) { return 8.0 * z; }), 1e-9);
}

TEST(Stencils, NeedFiveRings)
{
    const DiskGrid g(4, 8);
    EXPECT_THROW((void)laplacian(sample(g, [](cplx z) { return z; })), Error);
}

TEST(Nonlinearity, VanishesForFlatMetricAndConformalMaps)
{
    const DiskGrid g(16, 32);
    const MapField w = sample(g, [](cplx z) { return 0.5 * z + 0.2 * std::conj(z); });
    for (cplx v : nonlinearity(ConformalMetric::euclidean(), w))
        EXPECT_EQ(v, cplx(0.0));
    for (cplx v : nonlinearity(ConformalMetric::spherical(), sample(g, [](cplx z) { return z; })))
        EXPECT_LT(std::abs(v), 1e-11);
    EXPECT_THROW((void)nonlinearity(ConformalMetric::hyperbolic(), w), Error);
}

TEST(Solve, FlatIdentityInOneIteration)
{
    const DiskGrid g(16, 32);
    const auto [w, report] = solve(ConformalMetric::euclidean(), BoundaryMap::identity(), g);
    EXPECT_TRUE(report.converged);
    EXPECT_EQ(report.iterations, 1);
    EXPECT_LT(sup_error(g, w.values, [](cplx z) { return z; }), 1e-10);
}

TEST(Solve, ConformalMapsAreFixedPointsForSphericalMetric)
{
    const DiskGrid g(16, 32);
    const auto [w, report] = solve(ConformalMetric::spherical(), BoundaryMap::identity(), g);
    EXPECT_TRUE(report.converged);
    EXPECT_LE(report.iterations, 3);
    EXPECT_LT(sup_error(g, w.values, [](cplx z) { return z; }), 1e-8);
}

TEST(Solve, SphericalNonlinearProblemConverges)
{
    const BoundaryMap f({0.2}, {});
    double prev = 0.0;
    for (int n : {16, 32}) {
        const auto [w, report] = solve(ConformalMetric::spherical(), f, DiskGrid(n, 2 * n));
        EXPECT_TRUE(report.converged);
        EXPECT_TRUE(report.monotone_after(3));
        EXPECT_LT(report.final_update, 1e-9);
        EXPECT_TRUE(w.is_self_map(1e-6));
        if (prev > 0.0) {
            EXPECT_LT(report.residual, prev / 2.0);
        }
        prev = report.residual;
    }
}

TEST(Solve, RefinementLevelsReturnTheFinestGrid)
{
    SolverConfig cfg;
    cfg.refinement_levels = 2;
    const auto [w, report] = solve(ConformalMetric::spherical(), BoundaryMap({0.2}, {}), DiskGrid(8, 16), cfg);
    EXPECT_EQ(w.grid, DiskGrid(16, 32));
    ASSERT_EQ(report.level_residuals.size(), 2u);
    EXPECT_LT(report.level_residuals[1], report.level_residuals[0]);
}

TEST(Solve, DivergenceCarriesHistory)
{
    SolverConfig cfg;
    cfg.max_iterations = 1;
    try {
        (void)solve(ConformalMetric::spherical(), BoundaryMap({0.2}, {}), DiskGrid(16, 32), cfg);
        FAIL();
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::divergence);
        EXPECT_EQ(e.report().history.size(), 1u);
        EXPECT_FALSE(e.report().converged);
    }
}

TEST(Solve, InputValidation)
{
    const DiskGrid g(16, 32);
    try {
        (void)solve(ConformalMetric::hyperbolic(), BoundaryMap::identity(), g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::input);
        EXPECT_NE(std::string(e.what()).find("approximate-analyticity gate"), std::string::npos);
    }
    SolverConfig bad;
    bad.damping = 0.0;
    EXPECT_THROW((void)solve(ConformalMetric::euclidean(), BoundaryMap::identity(), g, bad), Error);
    EXPECT_THROW((void)solve(ConformalMetric::euclidean(), BoundaryMap::identity(), DiskGrid(4, 8)), Error);
}

TEST(Interpolate, ExactAtNodes)
{
    const DiskGrid g(8, 16);
    const MapField w = sample(g, [](cplx z) { return std::exp(z); });
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a)
            EXPECT_NEAR(std::abs(interpolate(w, g.node(j, a)) - w.at(j, a)), 0.0, 1e-14);
}

TEST(Interpolate, SmoothFields)
{
    const DiskGrid g(64, 128);
    const MapField sq = sample(g, [](cplx z) { return cplx(std::norm(z)); });
    EXPECT_NEAR(std::abs(interpolate(sq, cplx(0.3, 0.4)) - 0.25), 0.0, 1e-3);
    const MapField id = sample(g, [](cplx z) { return z; });
    for (cplx z : {cplx(0.0), cplx(0.001, 0.002), cplx(0.5, -0.3), cplx(0.0, 0.999), cplx(1.0, 0.0)})
        EXPECT_LT(std::abs(interpolate(id, z) - z), 1e-3) << z;
    EXPECT_THROW((void)interpolate(id, cplx(1.1, 0.0)), Error);
}

TEST(SmoothInterpolant, HigherOrderThanBilinear)
{
    const DiskGrid g(32, 64);
    const MapField w = sample(g, [](cplx z) { return z * z * std::conj(z) + 0.3 * z; });
    const SmoothInterpolant s(w);
    double e = 0.0;
    for (cplx z : {cplx(0.01, 0.0), cplx(0.2, 0.33), cplx(-0.71, 0.4), cplx(0.1, -0.98), cplx(0.0, 1.0)})
        e = std::max(e, std::abs(s(z) - (z * z * std::conj(z) + 0.3 * z)));
    EXPECT_LT(e, 1e-5);
}

TEST(OriginValue, RecoversSmoothFieldAtZero)
{
    const DiskGrid g(16, 32);
    EXPECT_NEAR(std::abs(origin_value(sample(g, [](cplx z) { return 0.25 + z + std::norm(z); })) - 0.25), 0.0, 1e-12);
}

TEST(ExampleMapAlpha, Values)
{
    const DiskGrid g(16, 32);
    const MapField w = example_map_alpha(1.0, g);
    EXPECT_NEAR(std::abs(interpolate(w, 0.5) - 0.25), 0.0, 2e-3);
    EXPECT_NEAR(std::abs(origin_value(w)), 0.0, 1e-12);
    const MapField w2 = example_map_alpha(2.0, g);
    EXPECT_NEAR(std::abs(w2.at(5, 3) - std::pow(g.radius(5), 2.0) * g.node(5, 3)), 0.0, 1e-15);
    EXPECT_THROW((void)example_map_alpha(0.0, g), Error);
    EXPECT_THROW((void)example_map_alpha(-1.0, g), Error);
}

TEST(ExampleMapAlpha, JetMatchesFiniteDifferences)
{
    const double alpha = 1.5;
    auto w = [&](cplx z) { return std::pow(std::abs(z), alpha) * z; };
    const cplx z(0.3, -0.45);
    const double h = 1e-5;
    const cplx wx = (w(z + h) - w(z - h)) / (2.0 * h);
    const cplx wy = (w(z + cplx(0, h)) - w(z - cplx(0, h))) / (2.0 * h);
    const auto jet = example_map_alpha_jet(alpha, z);
    EXPECT_NEAR(std::abs(jet.dz - 0.5 * (wx - cplx(0, 1) * wy)), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(jet.dzbar - 0.5 * (wx + cplx(0, 1) * wy)), 0.0, 1e-8);
    const double hh = 1e-4;
    const cplx lap = (w(z + hh) + w(z - hh) + w(z + cplx(0, hh)) + w(z - cplx(0, hh)) - 4.0 * w(z)) / (hh * hh);
    EXPECT_NEAR(std::abs(jet.laplacian - lap), 0.0, 1e-5);
    const auto origin = example_map_alpha_jet(alpha, 0.0);
    EXPECT_EQ(std::abs(origin.dz) - std::abs(origin.dzbar), 0.0);
}
