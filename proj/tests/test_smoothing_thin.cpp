#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace densq;

TEST(Profiles, DerivativesMatchFiniteDifferences) {
    EXPECT_LT(profile_derivative_mismatch(RadialProfile::gaussian(), 6.0), 1e-6);
    EXPECT_LT(profile_derivative_mismatch(RadialProfile::smooth_bump(), 2.5), 1e-6);
    EXPECT_LT(profile_derivative_mismatch(RadialProfile::sharp_step(8.0), 3.0), 1e-5);
}

TEST(Profiles, BumpShape) {
    const auto b = RadialProfile::smooth_bump();
    EXPECT_EQ(b.value(0.3), 1.0);
    EXPECT_EQ(b.value(2.0), 0.0);
    EXPECT_NEAR(b.value(1.25), 0.5, 1e-15);
}

TEST(Identity, DiracClosedForm) {
    const auto m = build_dirac(2);
    const std::vector<double> x = {0.3, 0.0};
    for (const auto& phi : {RadialProfile::gaussian(), RadialProfile::smooth_bump()}) {
        const auto c = verify_convolution_identity(m, phi, x, 0.5, 1.2);
        EXPECT_LT(c.residual, 1e-10) << phi.name;
        const double want = phi.value(0.6) * std::pow(0.5, -1.2) - phi.value(0.3) * std::pow(1.0, -1.2);
        EXPECT_NEAR(c.smoothed, want, 1e-14);
    }
}

TEST(Identity, RandomMeasures) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(200), w(100);
    for (double& v : c) v = u(rng);
    for (double& v : w) v = 0.1 + u(rng);
    const WeightedPointMeasure m(2, c, w);
    for (int q = 0; q < 10; ++q) {
        const std::vector<double> x = {u(rng), u(rng)};
        const double R = 0.05 + u(rng);
        for (const auto& phi : {RadialProfile::gaussian(), RadialProfile::smooth_bump()})
            EXPECT_LT(verify_convolution_identity(m, phi, x, R, 0.4 + u(rng)).residual, 1e-6);
    }
}

TEST(Identity, RefusesBadArguments) {
    const auto m = build_dirac(2);
    const std::vector<double> x = {0.0, 0.0};
    EXPECT_THROW(verify_convolution_identity(m, RadialProfile::gaussian(), x, 1.0, 0.5, 4), DomainError);
    EXPECT_THROW(verify_convolution_identity(m, RadialProfile::constant(1.0), x, 1.0, 0.5), DomainError);
}

TEST(ThinBoundary, FindsRadiusOnCantor) {
    const auto m = build_cantor(2, 1.0, 5);
    const BallIndex index(m);
    const std::vector<double> x(m.point(10).begin(), m.point(10).end());
    const auto tb = find_thin_boundary_radius(index, x, 0.05);
    EXPECT_GE(tb.radius, 0.05);
    EXPECT_LE(tb.radius, 0.1);
    EXPECT_LE(tb.worst_ratio, 1.0);
    // independent recheck of the thinness condition at the returned radius
    const double big = oracle::mass_in_ball(m, x, 2.0 * tb.radius);
    for (double l : default_lambda_grid()) {
        double layer = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double d = oracle::dist(m.point(i), x);
            if (d <= std::min(2.0, 1.0 + l) * tb.radius && d >= (1.0 - l) * tb.radius) layer += m.weight(i);
        }
        EXPECT_LE(layer, 64.0 * l * big * (1.0 + 1e-12));
    }
}

TEST(ThinBoundary, AvoidsAHeavyShell) {
    // a ring of heavy atoms at radius 1 around a light center: r' = 1 is never thin
    std::vector<double> c = {0.0, 0.0};
    std::vector<double> w = {1e-3};
    for (int k = 0; k < 720; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 720.0;
        c.push_back(std::cos(t));
        c.push_back(std::sin(t));
        w.push_back(1.0);
    }
    const WeightedPointMeasure m(2, c, w);
    const BallIndex index(m);
    const std::vector<double> x = {0.0, 0.0};
    const auto tb = find_thin_boundary_radius(index, x, 0.9, 64.0);
    EXPECT_GT(std::abs(tb.radius - 1.0), 1.0 / 1024.0);
    EXPECT_GT(boundary_layer_mass(index, x, 1.0, 1.0 / 1024.0), 0.0);
}

TEST(ThinBoundary, ErrorsAreTyped) {
    const auto m = build_dirac(2);
    const BallIndex index(m);
    EXPECT_THROW(find_thin_boundary_radius(index, std::vector<double>{10.0, 0.0}, 1.0), DegenerateBall);
    EXPECT_THROW(find_thin_boundary_radius(index, std::vector<double>{0.0, 0.0}, 0.0), DomainError);
    // the only atom sits on every candidate sphere's layer when the threshold is tiny
    const std::vector<double> l = {1.0};
    EXPECT_THROW(find_thin_boundary_radius(index, std::vector<double>{1.5, 0.0}, 1.0, 1e-6, l), NotFound);
}
