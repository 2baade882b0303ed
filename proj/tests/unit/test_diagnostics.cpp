#include <harmap/diagnostics.hpp>
#include <harmap/disk_geometry.hpp>
#include <harmap/fixtures.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace harmap;
using geometry::DiskAutomorphism;

namespace {

ErrorKind kind_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::io;
}

} // namespace

TEST(Dilatation, IdentityAndLinearMaps)
{
    const DiskGrid g(16, 32);
    const auto id = dilatation_field(sample(g, [](cplx z) { return z; }));
    EXPECT_NEAR(id.sup_k, 0.0, 1e-12);
    EXPECT_NEAR(id.sup_K, 1.0, 1e-12);
    const auto lin = dilatation_field(sample(g, [](cplx z) { return z + 0.2 * std::conj(z); }));
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(lin.k[i], 0.2, 1e-12);
        EXPECT_NEAR(lin.K[i], 1.5, 1e-12);
    }
    EXPECT_NEAR(K_from_k(0.2), 1.5, 1e-15);
}

TEST(Dilatation, AlphaMapAwayFromOrigin)
{
    // k = (alpha/2)/(1 + alpha/2) = alpha/(alpha + 2).
    for (double alpha : {1.0, 2.0}) {
        const DiskGrid g(32, 64);
        const auto d = dilatation_field(example_map_alpha(alpha, g));
        for (int j = 2; j < g.nr(); ++j)
            for (int a = 0; a < g.ntheta(); ++a)
                EXPECT_NEAR(d.k[g.index(j, a)], alpha / (alpha + 2.0), 1e-9);
        EXPECT_NEAR(d.sup_K, 1.0 + alpha, 1e-6);
    }
}

TEST(Dilatation, SingularAndReversedMaps)
{
    const DiskGrid g(16, 32);
    EXPECT_EQ(kind_of([&] { (void)dilatation_field(sample(g, [](cplx z) { return std::conj(z); })); }),
              ErrorKind::invalid_map);
    const auto rev = dilatation_field(sample(g, [](cplx z) { return 0.2 * z + std::conj(z); }));
    EXPECT_EQ(rev.orientation_reversed.size(), g.size());
}

TEST(Bilipschitz, LinearMaps)
{
    const DiskGrid g(16, 32);
    const auto id = bilipschitz_estimate(sample(g, [](cplx z) { return z; }));
    EXPECT_NEAR(id.inf_l, 1.0, 1e-12);
    EXPECT_NEAR(id.sup_L, 1.0, 1e-12);
    EXPECT_TRUE(id.bilipschitz);
    const auto two = bilipschitz_estimate(sample(g, [](cplx z) { return 2.0 * z; }));
    EXPECT_NEAR(two.inf_l, 2.0, 1e-12);
    EXPECT_NEAR(two.sup_L, 2.0, 1e-12);
}

TEST(Bilipschitz, AlphaMapDegeneratesAtOrigin)
{
    double prev = 1.0;
    for (int n : {32, 64, 128}) {
        const auto b = bilipschitz_estimate(example_map_alpha(1.0, DiskGrid(n, 2 * n)));
        EXPECT_FALSE(b.bilipschitz);
        EXPECT_LT(b.ring_inf_l[0], prev);
        prev = b.ring_inf_l[0];
    }
    EXPECT_LT(prev, 0.05);
}

TEST(Hopf, ConformalAndLinearMaps)
{
    const DiskGrid g(16, 32);
    for (cplx v : hopf_differential(ConformalMetric::spherical(), sample(g, [](cplx z) { return z; })))
        EXPECT_LT(std::abs(v), 1e-12);
    const cplx c(0.2, 0.1);
    for (cplx v : hopf_differential(ConformalMetric::euclidean(), sample(g, [&](cplx z) { return z + c * std::conj(z); })))
        EXPECT_NEAR(std::abs(v - std::conj(c)), 0.0, 1e-12);
}

TEST(Hopf, HolomorphyResidual)
{
    const DiskGrid g(16, 32);
    EXPECT_LT(holomorphy_residual(g, NodeField(g.size(), cplx(0.3, 0.7))), 1e-12);
    NodeField zbar(g.size());
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a)
            zbar[g.index(j, a)] = std::conj(g.node(j, a));
    EXPECT_NEAR(holomorphy_residual(g, zbar), 1.0, 1e-10);
}

TEST(Normalization, ComposesWithAutomorphism)
{
    const DiskGrid g(16, 32);
    const MapField w = sample(g, [](cplx z) { return DiskAutomorphism::from_zero(cplx(0.2, 0.1))(z); });
    EXPECT_EQ(kind_of([&] { require_normalized(w, "test"); }), ErrorKind::precondition);
    const MapField n = normalize_origin(w);
    EXPECT_LT(std::abs(origin_value(n)), 1e-6);
    EXPECT_NO_THROW(require_normalized(n, "test"));
}

TEST(Mori, IdentityHasZeroSlack)
{
    const auto r = mori_check(sample(DiskGrid(16, 32), [](cplx z) { return z; }), 1.0);
    EXPECT_TRUE(r.passed);
    EXPECT_NEAR(r.slack, 0.0, 1e-12);
}

TEST(Mori, AlphaMapPassesWithItsDilatation)
{
    for (double alpha : {1.0, 2.0})
        EXPECT_TRUE(mori_check(example_map_alpha(alpha, DiskGrid(16, 32)), 1.0 + alpha).passed);
}

TEST(Mori, RequiresNormalisationAndValidK)
{
    const MapField shifted = sample(DiskGrid(16, 32), [](cplx z) { return 0.5 * z + 0.1; });
    EXPECT_EQ(kind_of([&] { (void)mori_check(shifted, 1.0); }), ErrorKind::precondition);
    const MapField id = sample(DiskGrid(16, 32), [](cplx z) { return z; });
    EXPECT_EQ(kind_of([&] { (void)mori_check(id, 0.5); }), ErrorKind::usage);
}

TEST(Mori, ContractionFails)
{
    EXPECT_FALSE(mori_check(sample(DiskGrid(16, 32), [](cplx z) { return 0.5 * z; }), 1.0).passed);
}

TEST(DistortionRatio, IsometriesGiveOne)
{
    const DiskGrid g(16, 32);
    EXPECT_NEAR(distortion_ratio(sample(g, [](cplx z) { return z; })).sup, 1.0, 1e-12);
    EXPECT_NEAR(distortion_ratio(sample(g, [](cplx z) { return std::polar(1.0, 0.8) * z; })).sup, 1.0, 1e-12);
}

TEST(DistortionRatio, AlphaMap)
{
    // (1 - r^2)/(1 - r^(2(1+alpha))) decreases from 1 at r = 0 to 1/(1+alpha) at r = 1.
    for (double alpha : {1.0, 2.0}) {
        const auto d = distortion_ratio(example_map_alpha(alpha, DiskGrid(64, 128)));
        EXPECT_NEAR(d.sup, 1.0, 1e-12);
        EXPECT_NEAR(d.boundary_limit, 1.0 / (1.0 + alpha), 1e-4);
    }
}

TEST(DistortionRatio, RejectsNonSelfMap)
{
    const MapField w = sample(DiskGrid(16, 32), [](cplx z) { return 1.5 * z; });
    EXPECT_EQ(kind_of([&] { (void)distortion_ratio(w); }), ErrorKind::invalid_map);
}

TEST(Rho0, Values)
{
    EXPECT_EQ(rho0(1.0), 0.25);
    double prev = rho0(1.0);
    for (double K = 1.05; K <= 3.0; K += 0.05) {
        EXPECT_LT(rho0(K), prev);
        prev = rho0(K);
    }
    EXPECT_NEAR(rho0(2.0), std::pow(4.0, -5.0), 1e-18);
    EXPECT_THROW((void)rho0(0.5), Error);
}

TEST(Barrier, ExponentSelection)
{
    EXPECT_EQ(barrier_exponent(0.0, 1.0), 1.0);
    EXPECT_EQ(barrier_exponent(0.2, 2.0), 1.0);
    // Binding case: the selected A makes the constraint an equality.
    const double B = 0.5, K = 1.5;
    const double A = barrier_exponent(B, K);
    EXPECT_NEAR(4.0 * A * rho0(K) * rho0(K) / (K * K) + 4.0 - 4.0 * B * K * K, 0.0, 1e-9);
}

TEST(Barrier, IdentityIsSubharmonic)
{
    // phi radial: phi'' + phi'/r = exp(A(r - 1))(A + 1/r) > 0.
    const auto r = barrier_check(sample(DiskGrid(32, 64), [](cplx z) { return z; }), 0.0, 1.0);
    EXPECT_TRUE(r.passed);
    EXPECT_GT(r.value, 1.0);
}

TEST(SingularIntegral, ClosedFormsAtOrigin)
{
    EXPECT_NEAR(singular_integral_Ip(0.0, 1.0), 4.0 * pi / 3.0, 1e-8);
    // u = r^2 reduces I_{3/2}(0) to pi B(1/4, 5/2).
    const double beta = pi * std::beta(0.25, 2.5);
    EXPECT_NEAR(singular_integral_Ip(0.0, 1.5), beta, 1e-6);
    EXPECT_NEAR(beta, 9.41, 0.01);
}

TEST(SingularIntegral, UniformlyBoundedInZ)
{
    const double i0 = singular_integral_Ip(0.0, 1.5);
    double prev = i0;
    for (double r : {0.5, 0.9, 0.99}) {
        const double v = singular_integral_Ip(std::polar(r, 0.7), 1.5);
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_LE(v, 1.5 * i0);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(SingularIntegral, RotationInvariant)
{
    EXPECT_NEAR(singular_integral_Ip(0.5, 1.5), singular_integral_Ip(std::polar(0.5, 2.0), 1.5), 1e-7);
}

TEST(SingularIntegral, Errors)
{
    EXPECT_THROW((void)singular_integral_Ip(1.0, 1.5), Error);
    EXPECT_THROW((void)singular_integral_Ip(0.0, 2.0), Error);
}

TEST(HyperbolicEnergy, IsometriesHaveUnitEnergy)
{
    const DiskGrid g(32, 64);
    const auto id = hyperbolic_energy(sample(g, [](cplx z) { return z; }));
    const auto rot = hyperbolic_energy(sample(g, [](cplx z) { return std::polar(1.0, 1.1) * z; }));
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(id.e[i], 1.0, 1e-10);
        EXPECT_NEAR(rot.e[i], 1.0, 1e-10);
    }
    // Exact derivatives: e = 1 to round-off for any automorphism.
    const auto q = DiskAutomorphism::from_zero(0.5);
    NodeField v(g.size()), dz(g.size()), dzbar(g.size(), 0.0);
    for (int j = 0; j < g.nr(); ++j)
        for (int a = 0; a < g.ntheta(); ++a) {
            v[g.index(j, a)] = q(g.node(j, a));
            dz[g.index(j, a)] = q.derivative(g.node(j, a), 1);
        }
    for (double e : hyperbolic_energy(g, v, dz, dzbar).e)
        EXPECT_NEAR(e, 1.0, 1e-12);
}

TEST(HyperbolicEnergy, FlagsBlowUp)
{
    const auto e = hyperbolic_energy(sample(DiskGrid(16, 32), [](cplx z) { return 2.0 * z; }));
    EXPECT_FALSE(e.blowup_nodes.empty());
}

TEST(GrowthConstants, HarmonicFieldHasZeroConstants)
{
    const auto c = laplacian_growth_constants(sample(DiskGrid(16, 32), [](cplx z) { return z + 0.2 * z * z; }));
    EXPECT_LT(c.B_est, 1e-9);
    EXPECT_LT(c.a_est, 1e-9);
    EXPECT_LT(c.b_est, 1e-9);
}

TEST(GrowthConstants, AlphaMap)
{
    const MapField coarse = example_map_alpha(1.0, DiskGrid(32, 64));
    const MapField fine = example_map_alpha(1.0, DiskGrid(64, 128));
    const auto c = laplacian_growth_constants(coarse, fine);
    EXPECT_LE(c.b_est, 3.0 + 1e-2);
    EXPECT_TRUE(c.B_unbounded);
    const auto smooth = laplacian_growth_constants(sample(DiskGrid(32, 64), [](cplx z) { return z + 0.2 * std::norm(z) * z; }),
                                                   sample(DiskGrid(64, 128), [](cplx z) { return z + 0.2 * std::norm(z) * z; }));
    EXPECT_FALSE(smooth.B_unbounded);
}
