#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace selective;

namespace {

std::vector<TransformSpec> every_transform() {
    auto v = oracle::all_transforms();
    for (auto f : kInvalidScoreTransforms) v.push_back(TransformSpec::make(f));
    return v;
}

}  // namespace

TEST(MonotoneQ, CertifiesMonotoneFamilies) {
    const ScoreDomain d;
    for (auto f : {TransformFamily::linear, TransformFamily::convex_quadratic, TransformFamily::exponential,
                   TransformFamily::sinh, TransformFamily::sigmoid_scaling, TransformFamily::tanh_scaling,
                   TransformFamily::relu, TransformFamily::smelu}) {
        const auto r = check_monotone_q(TransformSpec::make(f), d);
        EXPECT_EQ(r.verdict, Verdict::certified_convex) << to_string(f);
        EXPECT_EQ(r.method, CheckMethod::theorem_monotone_q);
        EXPECT_TRUE(r.witnesses.empty());
    }
}

TEST(MonotoneQ, CoshIsOnlyNotCertified) {
    const auto r = check_monotone_q(TransformSpec::make(TransformFamily::cosh, 1.0, 0.0, 0.7), ScoreDomain());
    EXPECT_EQ(r.verdict, Verdict::not_certified);
    EXPECT_FALSE(r.witnesses.empty());
}

TEST(Pointwise, CertifiesCoshAndShiftedPower) {
    const ScoreDomain d;
    const auto cosh = check_pointwise_condition(TransformSpec::make(TransformFamily::cosh, 1.0, 0.0, 0.7), d);
    EXPECT_EQ(cosh.verdict, Verdict::certified_convex);
    EXPECT_GE(cosh.margin, 0.0);
    const auto sp = check_pointwise_condition(TransformSpec::shifted_power(2.0, 2.0), d);
    EXPECT_EQ(sp.verdict, Verdict::certified_convex);

    const auto v = validate_transform(TransformSpec::make(TransformFamily::cosh, 1.0, 0.0, 0.7), d);
    EXPECT_TRUE(v.certified());
    EXPECT_EQ(v.method, CheckMethod::corollary_pointwise);
}

TEST(SlopeScan, RefutesInvalidCatalogWithWitnesses) {
    const ScoreDomain d;
    for (auto f : kInvalidScoreTransforms) {
        const TransformSpec t = TransformSpec::make(f);
        const auto r = slope_scan(t, d);
        EXPECT_EQ(r.verdict, Verdict::invalid) << to_string(f);
        ASSERT_FALSE(r.witnesses.empty()) << to_string(f);
        EXPECT_LT(r.margin, 0.0);
        // An independent secant check at the first witness away from singular points.
        const auto bps = transform_breakpoints(t);
        bool confirmed = false;
        for (const Witness& w : r.witnesses) {
            bool near_bp = false;
            for (double b : bps) near_bp = near_bp || std::fabs(w.z - b) < 1e-2;
            if (near_bp) continue;
            const double secant = oracle::central_difference(
                [&](double z) { return transform_eval(t, z).h; }, w.z, 1e-5);
            EXPECT_LT(secant, 0.0) << to_string(f) << " z=" << w.z;
            confirmed = true;
            break;
        }
        EXPECT_TRUE(confirmed) << to_string(f);
    }
}

TEST(SlopeScan, AgreesWithPointwiseOnEveryFamily) {
    const ScoreDomain d;
    for (const TransformSpec& t : every_transform()) {
        for (double gamma : {0.5, 0.7, 1.0, 2.0}) {
            TransformSpec tg = t;
            tg.gamma = gamma;
            const bool scan_ok = slope_scan(tg, d).certified();
            const bool point_ok = check_pointwise_condition(tg, d).certified();
            EXPECT_EQ(scan_ok, point_ok) << to_string(t.family) << " gamma=" << gamma;
        }
    }
}

TEST(FCondition, AgreesWithPointwise) {
    const ScoreDomain d;
    for (const TransformSpec& t : every_transform()) {
        for (double gamma : {0.5, 0.7, 1.0, 2.0}) {
            TransformSpec tg = t;
            tg.gamma = gamma;
            EXPECT_EQ(check_f_condition(tg, d).verdict, check_pointwise_condition(tg, d).verdict)
                << to_string(t.family) << " gamma=" << gamma;
        }
    }
}

TEST(FDerivative, NecessaryConditionHoldsOnCertifiedSpecs) {
    const ScoreDomain d;
    int checked = 0;
    for (const TransformSpec& t : every_transform()) {
        if (!validate_transform(t, d).certified()) continue;
        EXPECT_EQ(check_f_derivative_monotone(t, d).verdict, Verdict::certified_convex) << to_string(t.family);
        ++checked;
    }
    EXPECT_GE(checked, 10);
}

TEST(FDerivative, FlagsDecreasingFPrime) {
    // f = sigma(x) has f' = sigma(1 - sigma), which decreases for x > 0.
    const auto r = check_f_derivative_monotone(TransformSpec::make(TransformFamily::f_sigmoid), ScoreDomain());
    EXPECT_EQ(r.verdict, Verdict::invalid);
    EXPECT_FALSE(r.witnesses.empty());
}

TEST(ValidateLink, AllLinksCertified) {
    for (const LinkSpec& l : oracle::all_links()) {
        const auto r = validate_link(l, ScoreDomain());
        EXPECT_TRUE(r.certified()) << to_string(l.family);
        EXPECT_EQ(r.verdict, Verdict::certified_by_slope_scan);
    }
}

TEST(Validity, WitnessesAreSortedAndDomainChecked) {
    const auto r = slope_scan(TransformSpec::make(TransformFamily::f_sigmoid), ScoreDomain());
    for (std::size_t i = 1; i < r.witnesses.size(); ++i) EXPECT_LT(r.witnesses[i - 1].z, r.witnesses[i].z);
    EXPECT_THROW(ScoreDomain(1.0, 1.0, 10), InvalidSpec);
    EXPECT_THROW(ScoreDomain(0.0, 1.0, 1), InvalidSpec);
}

TEST(Validity, Names) {
    EXPECT_EQ(to_string(Verdict::certified_convex), "certified_convex");
    EXPECT_EQ(to_string(Verdict::invalid), "invalid");
    EXPECT_EQ(to_string(CheckMethod::corollary_pointwise), "corollary_pointwise");
}
