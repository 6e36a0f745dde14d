#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"

using namespace selective;

namespace {

// Families whose scaling q is non-decreasing, which makes the composite
// log-partition convex.
std::vector<TransformSpec> monotone_q_transforms() {
    std::vector<TransformSpec> v;
    for (auto f : {TransformFamily::linear, TransformFamily::convex_quadratic, TransformFamily::exponential,
                   TransformFamily::anti_exponential, TransformFamily::sinh, TransformFamily::sigmoid_scaling,
                   TransformFamily::tanh_scaling, TransformFamily::relu, TransformFamily::smelu}) {
        v.push_back(TransformSpec::make(f));
    }
    return v;
}

bool near_any(const std::vector<double>& z, const std::vector<double>& bps, double gap) {
    for (double zk : z) {
        for (double b : bps) {
            if (std::fabs(zk - b) < gap) return true;
        }
    }
    return false;
}

std::vector<double> sample_away(oracle::Gen& gen, std::size_t K, const std::vector<double>& bps) {
    for (;;) {
        auto z = gen.vector(K, -3.0, 3.0);
        if (!near_any(z, bps, 1e-3)) return z;
    }
}

}  // namespace

TEST(CompositeSoftmax, SumsToOne) {
    oracle::Gen gen(41);
    for (const TransformSpec& t : oracle::all_transforms()) {
        for (std::size_t K : {2u, 3u, 5u}) {
            const auto z = gen.vector(K, -5.0, 5.0);
            const auto p = composite_softmax(t, z);
            double sum = 0.0;
            for (double pk : p) {
                EXPECT_GE(pk, 0.0);
                sum += pk;
            }
            EXPECT_NEAR(sum, 1.0, 1e-12) << to_string(t.family);
        }
    }
}

TEST(CompositeSoftmax, LinearIsStandardSoftmax) {
    const std::vector<double> z = {0.3, -1.0, 2.0};
    const auto p = composite_softmax(TransformSpec::make(TransformFamily::linear), z);
    double Z = 0.0;
    for (double zk : z) Z += std::exp(zk);
    for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(p[k], std::exp(z[k]) / Z, 1e-15);
}

TEST(CompositeSoftmax, SigmoidScalingIsAddOneSoftmax) {
    oracle::Gen gen(42);
    const TransformSpec t = TransformSpec::make(TransformFamily::sigmoid_scaling);
    for (int i = 0; i < 100; ++i) {
        const auto z = gen.vector(4, -5.0, 5.0);
        double Z = 0.0;
        for (double zk : z) Z += 1.0 + std::exp(zk);
        const auto p = composite_softmax(t, z);
        for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(p[k], (1.0 + std::exp(z[k])) / Z, 1e-12);
    }
}

TEST(CompositeSoftmax, LargeScoresStayFinite) {
    const std::vector<double> z = {600.0, 0.0, -600.0};
    const auto p = composite_softmax(TransformSpec::make(TransformFamily::convex_quadratic), z);
    for (double pk : p) EXPECT_TRUE(std::isfinite(pk));
    EXPECT_TRUE(std::isfinite(log_partition(TransformSpec::make(TransformFamily::convex_quadratic), z)));
}

TEST(CompositeSoftmax, ShiftInvariance) {
    oracle::Gen gen(43);
    const TransformSpec lin = TransformSpec::make(TransformFamily::linear);
    for (int i = 0; i < 100; ++i) {
        const auto sh = gen.vector(3, -3.0, 3.0), s = gen.vector(3, -3.0, 3.0);
        const double c = gen.uniform(-2.0, 2.0);
        std::vector<double> sh2 = sh, s2 = s;
        for (double& v : sh2) v += c;
        for (double& v : s2) v += c;
        EXPECT_NEAR(mc_matching_loss(lin, sh2, s2), mc_matching_loss(lin, sh, s), 1e-12);
        const auto p = composite_softmax(lin, s), p2 = composite_softmax(lin, s2);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p[k], p2[k], 1e-12);
    }
}

TEST(CompositeSoftmax, QuadraticShiftWitness) {
    const TransformSpec t = TransformSpec::make(TransformFamily::convex_quadratic);
    const std::vector<double> z = {0.0, 1.0, 2.0}, z7 = {7.0, 8.0, 9.0};
    const auto a = composite_softmax(t, z), b = composite_softmax(t, z7);
    double w = 0.0;
    for (std::size_t k = 0; k < 3; ++k) w = std::max(w, std::fabs(a[k] - b[k]));
    EXPECT_GT(w, 1e-3);
    EXPECT_NEAR(w, 0.26367173621996953, 1e-12);
}

TEST(McLoss, ZeroAtEqualityAndNonNegative) {
    oracle::Gen gen(44);
    for (const TransformSpec& t : monotone_q_transforms()) {
        for (int i = 0; i < 50; ++i) {
            const auto s = gen.vector(3, -3.0, 3.0), sh = gen.vector(3, -3.0, 3.0);
            EXPECT_EQ(mc_matching_loss(t, s, s), 0.0) << to_string(t.family);
            EXPECT_GE(mc_matching_loss(t, sh, s), -1e-12) << to_string(t.family);
        }
    }
}

TEST(McLoss, GradientMatchesFiniteDifference) {
    oracle::Gen gen(45);
    for (const TransformSpec& t : oracle::all_transforms()) {
        const auto bps = transform_breakpoints(t);
        for (std::size_t K : {2u, 3u, 5u}) {
            for (int i = 0; i < 20; ++i) {
                const auto s = gen.vector(K, -3.0, 3.0);
                const auto sh = sample_away(gen, K, bps);
                const auto g = mc_matching_grad(t, sh, s);
                for (std::size_t k = 0; k < K; ++k) {
                    const double fd = oracle::central_difference(
                        [&](double x) {
                            auto v = sh;
                            v[k] = x;
                            return mc_matching_loss(t, v, s);
                        },
                        sh[k]);
                    EXPECT_TRUE(oracle::close(g[k], fd, 1e-5, 1e-8)) << to_string(t.family) << " K=" << K;
                }
            }
        }
    }
}

TEST(McLoss, ReducesToScalarForTwoClassesLinear) {
    // Two-class linear Softmax with one score pinned at 0 is the sigmoid.
    const TransformSpec t = TransformSpec::make(TransformFamily::linear);
    const LinkSpec l = LinkSpec::make(LinkFamily::sigmoid);
    oracle::Gen gen(46);
    for (int i = 0; i < 50; ++i) {
        const double sh = gen.uniform(-5.0, 5.0), s = gen.uniform(-5.0, 5.0);
        const std::vector<double> a = {sh, 0.0}, b = {s, 0.0};
        EXPECT_NEAR(mc_matching_loss(t, a, b), matching_loss(l, sh, s), 1e-12);
    }
}

TEST(McLoss, DimensionErrors) {
    const TransformSpec t = TransformSpec::make(TransformFamily::linear);
    const std::vector<double> one = {1.0}, two = {1.0, 2.0}, three = {1.0, 2.0, 3.0};
    EXPECT_THROW(composite_softmax(t, one), DimensionMismatch);
    EXPECT_THROW(mc_matching_loss(t, two, three), DimensionMismatch);
    EXPECT_THROW(mc_matching_grad(t, two, three), DimensionMismatch);
    EXPECT_THROW(mc_ce_loss(t, two, three), DimensionMismatch);
    EXPECT_THROW(diagonal_loss(LinkSpec::make(LinkFamily::sigmoid), two, three), DimensionMismatch);
    const std::vector<double> bad = {1.0, NAN};
    EXPECT_THROW(composite_softmax(t, bad), NonFiniteInput);
}

TEST(Hessian, MatchesFiniteDifferencedLink) {
    oracle::Gen gen(47);
    for (const TransformSpec& t : oracle::all_transforms()) {
        const auto bps = transform_breakpoints(t);
        for (int i = 0; i < 20; ++i) {
            const auto z = sample_away(gen, 3, bps);
            const DenseMatrix H = mc_hessian(t, z);
            for (std::size_t j = 0; j < 3; ++j) {
                auto zp = z, zm = z;
                zp[j] += 1e-6;
                zm[j] -= 1e-6;
                const auto hp = mc_link(t, zp), hm = mc_link(t, zm);
                for (std::size_t k = 0; k < 3; ++k) {
                    const double fd = (hp[k] - hm[k]) / 2e-6;
                    EXPECT_TRUE(oracle::close(H(k, j), fd, 1e-4, 1e-4)) << to_string(t.family);
                }
            }
        }
    }
}

TEST(Hessian, PositiveSemidefiniteForMonotoneScaling) {
    oracle::Gen gen(48);
    for (const TransformSpec& t : monotone_q_transforms()) {
        for (int i = 0; i < 100; ++i) {
            const auto z = gen.vector(4, -3.0, 3.0);
            const DenseMatrix H = mc_hessian(t, z);
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
                H.data.data(), 4, 4);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9) << to_string(t.family);
        }
    }
}

TEST(Hessian, VarianceDecomposition) {
    oracle::Gen gen(49);
    for (const TransformSpec& t : oracle::all_transforms()) {
        for (double gamma : {1.0, 0.5}) {
            TransformSpec tg = t;
            tg.gamma = gamma;
            for (int i = 0; i < 20; ++i) {
                const auto z = gen.vector(3, -3.0, 3.0);
                const auto x = gen.vector(3, -1.0, 1.0);
                const DenseMatrix H = mc_hessian(tg, z);
                const auto p = composite_softmax(tg, z);
                double quad = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    for (std::size_t j = 0; j < 3; ++j) quad += x[k] * H(k, j) * x[j];
                }
                double diag = 0.0, m1 = 0.0, m2 = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    const CompositeEval e = transform_eval(tg, z[k]);
                    diag += p[k] * e.q_slope * x[k] * x[k];
                    m1 += p[k] * e.q * x[k];
                    m2 += p[k] * e.q * e.q * x[k] * x[k];
                }
                const double expect = diag + (m2 - m1 * m1) / gamma;
                EXPECT_TRUE(oracle::close(quad, expect, 1e-10, 1e-10)) << to_string(t.family);
            }
        }
    }
}

TEST(McCe, GradientAndDivergence) {
    oracle::Gen gen(50);
    for (const TransformSpec& t : oracle::all_transforms()) {
        const auto bps = transform_breakpoints(t);
        for (int i = 0; i < 20; ++i) {
            const auto s = gen.vector(3, -3.0, 3.0);
            const auto sh = sample_away(gen, 3, bps);
            const auto r = mc_ce_loss(t, sh, s);
            for (std::size_t k = 0; k < 3; ++k) {
                const double fd = oracle::central_difference(
                    [&](double x) {
                        auto v = sh;
                        v[k] = x;
                        return mc_ce_loss(t, v, s).loss;
                    },
                    sh[k]);
                EXPECT_TRUE(oracle::close(r.grad[k], fd, 1e-5, 1e-8)) << to_string(t.family);
            }
        }
    }
    const TransformSpec q = TransformSpec::make(TransformFamily::convex_quadratic);
    double gap = 0.0;
    for (int i = 0; i < 61; ++i) {
        for (int j = 0; j < 61; ++j) {
            const std::vector<double> sh = {-3.0 + 6.0 * i / 60.0, 0.0, 0.0};
            const std::vector<double> s = {-3.0 + 6.0 * j / 60.0, 0.0, 0.0};
            const auto ce = mc_ce_loss(q, sh, s).grad;
            const auto m = mc_matching_grad(q, sh, s);
            for (std::size_t k = 0; k < 3; ++k) gap = std::max(gap, std::fabs(ce[k] - m[k]));
        }
    }
    EXPECT_NEAR(gap, 5.8695895011026931, 1e-10);
}

TEST(Diagonal, SumOfScalarLossesAndNoShiftInvariance) {
    const LinkSpec l = LinkSpec::make(LinkFamily::sigmoid);
    const std::vector<double> sh = {1.0, -1.0}, s = {0.0, 0.0};
    EXPECT_NEAR(diagonal_loss(l, sh, s), matching_loss(l, 1.0, 0.0) + matching_loss(l, -1.0, 0.0), 1e-15);
    EXPECT_NEAR(diagonal_loss(l, sh, s), 0.2402290139165551, 1e-12);
    const std::vector<double> sh2 = {3.0, 1.0}, s2 = {2.0, 2.0};
    EXPECT_NEAR(diagonal_loss(l, sh2, s2), 0.10799301700601949, 1e-12);
    const auto g = diagonal_grad(l, sh, s);
    EXPECT_NEAR(g[0], matching_grad(l, 1.0, 0.0), 1e-15);
    EXPECT_NEAR(g[1], matching_grad(l, -1.0, 0.0), 1e-15);
}

TEST(StandardSoftmax, MatchesCompositeLinear) {
    oracle::Gen gen(51);
    const StandardSoftmaxSpec spec{2.0, 0.5, 0.7, {}};
    const TransformSpec t = TransformSpec::make(TransformFamily::linear, 2.0, 0.5, 0.7);
    for (int i = 0; i < 50; ++i) {
        const auto sh = gen.vector(3, -3.0, 3.0), s = gen.vector(3, -3.0, 3.0);
        const auto r = standard_softmax_suite(spec, sh, s);
        EXPECT_NEAR(r.matching_loss, mc_matching_loss(t, sh, s), 1e-12);
        const auto g = mc_matching_grad(t, sh, s);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.grad[k], g[k], 1e-12);
        EXPECT_NEAR(r.ce_loss - mc_ce_loss(t, sh, s).loss, 0.0, 1e-12);
    }
}

TEST(StandardSoftmax, RhoBiasAndErrors) {
    const std::vector<double> z = {0.0, 0.0};
    const auto r = standard_softmax_suite(StandardSoftmaxSpec{1.0, 0.0, 1.0, {1.0, 3.0}}, z, z);
    EXPECT_NEAR(r.p[0], 0.25, 1e-15);
    EXPECT_NEAR(r.p[1], 0.75, 1e-15);
    EXPECT_EQ(r.matching_loss, 0.0);
    EXPECT_THROW(standard_softmax_suite(StandardSoftmaxSpec{1.0, 0.0, 1.0, {1.0}}, z, z), DimensionMismatch);
    EXPECT_THROW(standard_softmax_suite(StandardSoftmaxSpec{1.0, 0.0, 1.0, {1.0, 0.0}}, z, z), InvalidSpec);
    EXPECT_THROW(standard_softmax_suite(StandardSoftmaxSpec{0.0, 0.0, 1.0, {}}, z, z), InvalidSpec);
}

TEST(McLoss, ScalarCertificationDoesNotCoverMulticlass) {
    // cosh scaling passes the scalar pointwise condition but its q is not
    // monotone, so the composite log-partition is not convex.
    const TransformSpec t = TransformSpec::make(TransformFamily::cosh);
    ASSERT_TRUE(validate_transform(t, ScoreDomain()).certified());
    ASSERT_FALSE(check_monotone_q(t, ScoreDomain()).certified());
    oracle::Gen gen(52);
    double lowest = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const auto sh = gen.vector(3, -5.0, 5.0), s = gen.vector(3, -5.0, 5.0);
        lowest = std::min(lowest, mc_matching_loss(t, sh, s));
    }
    EXPECT_LT(lowest, -1e-3);
}
