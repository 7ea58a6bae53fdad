#include "lockdown/final_size.hpp"
#include "reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lockdown;

TEST(FinalSizeFromState, NoLockdownBaseline) {
    const EndPoint end = integrate_to(ref::kParams, LockdownPolicy::uncontrolled(), ref::kX0, 500.0, 0.01);
    const double s_inf = final_size_from_state({ref::kParams, end.state});
    EXPECT_NEAR(s_inf, ref::kNoLockdown, 1e-8);
    EXPECT_NEAR(s_inf, 0.0668, 1e-3);
    // Directly from the initial state as well.
    EXPECT_NEAR(final_size_from_state({ref::kParams, ref::kX0}), ref::kNoLockdown, 1e-9);
}

TEST(FinalSizeFromState, HerdEquilibriumIsFixed) {
    const double sh = ref::kParams.s_herd();
    EXPECT_EQ(final_size_from_state({ref::kParams, {sh, 0.0}}), sh);
    EXPECT_NEAR(final_size_from_state({ref::kParams, {sh, 1e-14}}), sh, 1e-6);
}

TEST(FinalSizeFromState, AgreesWithLongHorizonIntegration) {
    const EndPoint far = integrate_to(ref::kParams, LockdownPolicy::uncontrolled(), ref::kX0, 1e4, 0.01);
    EXPECT_NEAR(final_size_from_state({ref::kParams, ref::kX0}), far.state.s, 1e-6);
}

TEST(FinalSizeFromState, Errors) {
    EXPECT_THROW(final_size_from_state({ref::kParams, {0.5, -0.1}}), SolverError);
    EXPECT_THROW(final_size_from_state({ref::kParams, {0.0, 0.1}}), ValidationError);
    EXPECT_THROW(final_size_from_state({ref::kParams, {0.5, 0.1}}, 0.0), ValidationError);
}

TEST(FinalSizeFromState, TinyFinalSizesForLargeR0) {
    const ModelParams params{1.0, 0.1};
    const double s_inf = final_size_from_state({params, {1.0 - 1e-5, 1e-5}});
    EXPECT_GT(s_inf, 0.0);
    EXPECT_LT(s_inf, 1e-3);
    // Phi is steep near zero, so scale by its slope there.
    const double slope = std::abs(1.0 - 1.0 / (10.0 * s_inf));
    const double residual = std::abs(phi(10.0, {s_inf, 0.0}) - phi(10.0, {1.0 - 1e-5, 1e-5}));
    EXPECT_LE(residual, 10.0 * kDefaultFinalSizeTol * slope);
}

TEST(FinalSizeProperty, ResidualAndHerdBound) {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> r0_dist(1.1, 12.0);
    std::uniform_real_distribution<double> s_dist(0.01, 1.0);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    constexpr double tol = 1e-10;
    for (int trial = 0; trial < 500; ++trial) {
        const ModelParams params{r0_dist(rng) * 0.1, 0.1};
        const double s = s_dist(rng);
        const double i = frac(rng) * (1.0 - s);
        if (!(i > 0.0))
            continue;
        const double r0 = params.r0();
        const double s_inf = final_size_from_state({params, {s, i}}, tol);
        const double slope = std::abs(1.0 - 1.0 / (r0 * s_inf));
        const double residual = std::abs(phi(r0, {s_inf, 0.0}) - phi(r0, {s, i}));
        ASSERT_LE(residual, 10.0 * tol * slope + 1e-14) << "trial " << trial;
        ASSERT_LE(s_inf, params.s_herd() + tol);
        ASSERT_LE(s_inf, s);
    }
}

TEST(FinalSizeOfPolicy, PolicyExamples) {
    // Oracle values at i0 = 1.49e-5.
    EXPECT_NEAR(final_size_of_policy(ref::kParams, {0.0, 74.3, 30.0}, ref::kX0, 0.01), ref::kPolicyAlpha0, 1e-7);
    // At i0 = 1.49e-6 these are the published 0.255 and 0.222.
    const double a0 = final_size_of_policy(ref::kParams, {0.0, 74.3, 30.0}, ref::kX0Small, 0.01);
    EXPECT_NEAR(a0, ref::kPolicyAlpha0Small, 1e-7);
    EXPECT_NEAR(a0, 0.255, 5e-3);
    const double a231 = final_size_of_policy(ref::kParams, {0.231, 72.1, 30.0}, ref::kX0Small, 0.01);
    EXPECT_NEAR(a231, ref::kPolicyAlpha231Small, 1e-7);
    EXPECT_NEAR(a231, 0.222, 5e-3);
}

TEST(FinalSizeOfPolicy, VanishingDurationMatchesNoLockdown) {
    const double s = final_size_of_policy(ref::kParams, {0.0, 60.0, 1e-6}, ref::kX0, 0.01);
    EXPECT_NEAR(s, ref::kNoLockdown, 1e-6);
}

TEST(AlphaBar, Values) {
    EXPECT_NEAR(alpha_bar(ref::kParams, ref::kX0), ref::kAlphaBar, 1e-12);
    EXPECT_NEAR(alpha_bar(ref::kParams, ref::kX0), 0.56, 0.01);
    // Hand evaluation: 0.5/0.5 * (ln 0.999 - ln 0.5) = ln 2 + ln 0.999.
    const double alt = alpha_bar({0.2, 0.1}, {0.999, 0.001});
    EXPECT_NEAR(alt, ref::kAlphaBarAlt, 1e-12);
    EXPECT_NEAR(alt, std::log(2.0) + std::log(0.999), 1e-12);
}

TEST(AlphaBar, VanishesAsS0ApproachesHerd) {
    // Goes like gap / i0 once the gap is well below i0.
    const double sh = ref::kParams.s_herd();
    double prev = 1.0;
    for (double gap : {1e-6, 1e-7, 1e-8, 1e-9, 1e-10}) {
        const double v = alpha_bar(ref::kParams, {sh + gap, 1e-5});
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, 1e-4);
    EXPECT_THROW(alpha_bar(ref::kParams, {sh, 1e-5}), ValidationError);
    EXPECT_THROW(alpha_bar(ref::kParams, {0.2, 1e-5}), ValidationError);
}

TEST(ConstantControl, FullContactEqualsNoLockdown) {
    EXPECT_NEAR(final_size_constant_control(ref::kParams, 1.0, ref::kX0), ref::kNoLockdown, 1e-9);
}

TEST(ConstantControl, MatchesOracleAndLongIntegration) {
    const double s = final_size_constant_control(ref::kParams, 0.8, ref::kX0);
    EXPECT_NEAR(s, ref::kConstantControl08, 1e-9);
    const EndPoint far = integrate_to(ref::kParams, LockdownPolicy::constant(0.8, 1e4), ref::kX0, 1e4, 0.01);
    EXPECT_NEAR(s, far.state.s, 1e-6);
}

TEST(ConstantControl, SubcriticalBurnsNothingAsI0Vanishes) {
    const double alpha = 0.3;  // alpha R0 = 0.87
    for (double i0 : {1e-4, 1e-6, 1e-9}) {
        const double s0 = 1.0 - 1e-4;
        const double s = final_size_constant_control(ref::kParams, alpha, {s0, i0});
        EXPECT_LE(s, s0);
        EXPECT_NEAR(s, s0, 20.0 * i0);
    }
    EXPECT_EQ(final_size_constant_control(ref::kParams, alpha, {0.9, 0.0}), 0.9);
}

TEST(ConstantControl, RejectsZeroIntensity) {
    EXPECT_THROW(final_size_constant_control(ref::kParams, 0.0, ref::kX0), ValidationError);
    EXPECT_THROW(final_size_constant_control(ref::kParams, 1.5, ref::kX0), ValidationError);
}
