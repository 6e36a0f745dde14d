#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace selective;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(TransformEval, LinearIsSigmoidLink) {
    const TransformSpec t = TransformSpec::make(TransformFamily::linear, 1.5, 0.5);
    const LinkSpec l = LinkSpec::make(LinkFamily::sigmoid, 1.5, 0.5);
    oracle::Gen gen(31);
    for (int i = 0; i < 50; ++i) {
        const double z = gen.uniform(-5.0, 5.0);
        const CompositeEval e = transform_eval(t, z);
        // h = q p with q = alpha, so h / alpha is the plain sigmoid.
        EXPECT_NEAR(e.h / 1.5, link_h(l, z), 1e-15);
    }
}

TEST(TransformEval, ConvexQuadraticValues) {
    const CompositeEval e = transform_eval(TransformSpec::make(TransformFamily::convex_quadratic), 2.0);
    EXPECT_DOUBLE_EQ(e.Q, 2.0);
    EXPECT_DOUBLE_EQ(e.q, 2.0);
    EXPECT_DOUBLE_EQ(e.q_slope, 1.0);
    EXPECT_NEAR(e.p, sig(2.0), 1e-16);
    EXPECT_NEAR(e.h, 2.0 * sig(2.0), 1e-15);
    EXPECT_NEAR(e.f, std::exp(2.0), 1e-13);
}

TEST(TransformEval, GammaSharpensProbability) {
    const TransformSpec t = TransformSpec::make(TransformFamily::linear, 1.0, 0.0, 0.25);
    EXPECT_NEAR(transform_eval(t, 1.0).p, sig(4.0), 1e-15);
    EXPECT_NEAR(transform_eval(t, 1.0).H, 0.25 * std::log1p(std::exp(4.0)), 1e-14);
}

TEST(TransformEval, TanhScalingLogFIsLogCosh) {
    const TransformSpec t = TransformSpec::make(TransformFamily::tanh_scaling);
    oracle::Gen gen(32);
    const double c0 = transform_eval(t, 0.0).Q - std::log(std::cosh(0.0));
    for (int i = 0; i < 100; ++i) {
        const double z = gen.uniform(-5.0, 5.0);
        EXPECT_NEAR(transform_eval(t, z).Q - std::log(std::cosh(z)), c0, 1e-10);
    }
}

TEST(TransformEval, RejectsBadInput) {
    EXPECT_THROW(transform_eval(TransformSpec::make(TransformFamily::sinh), NAN), NonFiniteInput);
    EXPECT_THROW(TransformSpec::make(TransformFamily::sinh, 1.0, 0.0, 0.0), InvalidSpec);
    EXPECT_THROW(TransformSpec::make(TransformFamily::sinh, -2.0), InvalidSpec);
    EXPECT_THROW(TransformSpec::smelu(0.0), InvalidSpec);
    EXPECT_THROW(TransformSpec::shifted_power(0.5, 2.0), InvalidSpec);
}

TEST(TransformEval, ExtremeScoresStayFinite) {
    for (const TransformSpec& t : oracle::all_transforms()) {
        for (double z : {-50.0, 50.0}) {
            const CompositeEval e = transform_eval(t, z);
            EXPECT_TRUE(std::isfinite(e.h)) << to_string(t.family) << " z=" << z;
            EXPECT_TRUE(std::isfinite(e.H)) << to_string(t.family) << " z=" << z;
        }
    }
}

TEST(TransformProperties, DerivativeConsistency) {
    oracle::Gen gen(33);
    for (const TransformSpec& t : oracle::all_transforms()) {
        const auto bps = transform_breakpoints(t);
        for (int i = 0; i < 200; ++i) {
            const double z = gen.away_from(-5.0, 5.0, bps);
            const CompositeEval e = transform_eval(t, z);
            auto at = [&](double u) { return transform_eval(t, u); };
            const double dQ = oracle::central_difference([&](double u) { return at(u).Q; }, z, 1e-5);
            const double dq = oracle::central_difference([&](double u) { return at(u).q; }, z, 1e-5);
            const double dH = oracle::central_difference([&](double u) { return at(u).H; }, z, 1e-5);
            const double dh = oracle::central_difference([&](double u) { return at(u).h; }, z, 1e-5);
            EXPECT_TRUE(oracle::close(dQ, e.q, 1e-6, 1e-8)) << to_string(t.family) << " z=" << z;
            EXPECT_TRUE(oracle::close(dq, e.q_slope, 1e-5, 1e-8)) << to_string(t.family) << " z=" << z;
            EXPECT_TRUE(oracle::close(dH, e.h, 1e-6, 1e-8)) << to_string(t.family) << " z=" << z;
            EXPECT_TRUE(oracle::close(dh, e.h_slope, 1e-5, 1e-8)) << to_string(t.family) << " z=" << z;
        }
    }
}

TEST(AmplifiedLoss, QuadratureEquivalence) {
    oracle::Gen gen(34);
    for (const TransformSpec& t : oracle::all_transforms()) {
        const auto bps = transform_breakpoints(t);
        for (int i = 0; i < 50; ++i) {
            const double s = gen.uniform(-5.0, 5.0), sh = gen.uniform(-5.0, 5.0);
            const double hs = transform_eval(t, s).h;
            const double q =
                oracle::integrate([&](double z) { return transform_eval(t, z).h - hs; }, s, sh, bps);
            EXPECT_TRUE(oracle::close(amplified_loss(t, sh, s), q, 1e-12, 1e-8))
                << to_string(t.family) << " " << sh << " " << s;
        }
    }
}

TEST(AmplifiedLoss, ConvexQuadraticIntegral) {
    // Gauss-Kronrod of z sigma(z^2/2) over [0, 1].
    EXPECT_NEAR(amplified_loss(TransformSpec::make(TransformFamily::convex_quadratic), 1.0, 0.0),
                0.28092980362016146, 1e-12);
}

TEST(AmplifiedLoss, ZeroAtEqualityAndGradient) {
    oracle::Gen gen(35);
    for (const TransformSpec& t : oracle::all_transforms()) {
        const auto bps = transform_breakpoints(t);
        for (int i = 0; i < 50; ++i) {
            const double s = gen.uniform(-5.0, 5.0);
            EXPECT_EQ(amplified_loss(t, s, s), 0.0) << to_string(t.family);
            const double sh = gen.away_from(-5.0, 5.0, bps);
            const double fd = oracle::central_difference([&](double x) { return amplified_loss(t, x, s); }, sh);
            EXPECT_TRUE(oracle::close(amplified_grad(t, sh, s), fd, 1e-5, 1e-8)) << to_string(t.family);
        }
    }
}

TEST(CompositeCe, GradientMatchesFiniteDifference) {
    oracle::Gen gen(36);
    for (const TransformSpec& t : oracle::all_transforms()) {
        const auto bps = transform_breakpoints(t);
        for (int i = 0; i < 50; ++i) {
            const double s = gen.uniform(-5.0, 5.0);
            const double sh = gen.away_from(-5.0, 5.0, bps);
            const double fd =
                oracle::central_difference([&](double x) { return ce_loss_composite(t, x, s).loss; }, sh);
            EXPECT_TRUE(oracle::close(ce_loss_composite(t, sh, s).grad, fd, 1e-5, 1e-8)) << to_string(t.family);
        }
    }
}

TEST(CompositeCe, EqualsMatchingGradientForLinear) {
    const TransformSpec t = TransformSpec::make(TransformFamily::linear);
    oracle::Gen gen(37);
    for (int i = 0; i < 100; ++i) {
        const double sh = gen.uniform(-5.0, 5.0), s = gen.uniform(-5.0, 5.0);
        EXPECT_NEAR(ce_loss_composite(t, sh, s).grad, amplified_grad(t, sh, s), 1e-12);
    }
}

TEST(CompositeCe, DivergesFromMatchingForQuadratic) {
    const TransformSpec t = TransformSpec::make(TransformFamily::convex_quadratic);
    double gap = 0.0;
    for (int i = 0; i < 61; ++i) {
        for (int j = 0; j < 61; ++j) {
            const double sh = -3.0 + 6.0 * i / 60.0, s = -3.0 + 6.0 * j / 60.0;
            gap = std::max(gap, std::fabs(ce_loss_composite(t, sh, s).grad - amplified_grad(t, sh, s)));
        }
    }
    EXPECT_GT(gap, 0.1);
    EXPECT_NEAR(gap, 5.9340783442164406, 1e-10);
}

TEST(ShiftedPower, Warning) {
    EXPECT_FALSE(shifted_power_warning(TransformSpec::shifted_power(2.0, 2.0)).has_value());
    EXPECT_TRUE(shifted_power_warning(TransformSpec::shifted_power(2.0, 0.5)).has_value());
    EXPECT_FALSE(shifted_power_warning(TransformSpec::make(TransformFamily::sinh)).has_value());
}

TEST(TransformFamilyNames, RoundTrip) {
    for (auto f : kDesignTransformFamilies) EXPECT_EQ(transform_family_from_string(to_string(f)), f);
    for (auto f : kInvalidScoreTransforms) EXPECT_EQ(transform_family_from_string(to_string(f)), f);
    EXPECT_FALSE(transform_family_from_string("softsign").has_value());
}
