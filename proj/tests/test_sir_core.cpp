#include "lockdown/sir_core.hpp"
#include "reference.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace lockdown;

TEST(ControlValue, OutsideInsideAndBoundary) {
    const LockdownPolicy p{0.231, 70.0, 30.0};
    EXPECT_EQ(control_value(p, 50.0), 1.0);
    EXPECT_EQ(control_value(p, 85.0), 0.231);
    EXPECT_EQ(control_value(p, 70.0), 0.231);
    EXPECT_EQ(control_value(p, 100.0), 0.231);
    EXPECT_EQ(control_value(p, 100.5), 1.0);
    EXPECT_EQ(control_value(LockdownPolicy{0.0, 0.0, 30.0}, 0.0), 0.0);
}

TEST(Derivatives, TableSetup) {
    const Derivative d = derivatives(ref::kParams, 1.0, ref::kX0);
    EXPECT_NEAR(d.ds_dt, ref::kDsDt, 1e-18);
    EXPECT_NEAR(d.di_dt, ref::kDiDt, 1e-18);
}

TEST(Derivatives, DiseaseFreeAndTotalLockdown) {
    const Derivative free = derivatives(ref::kParams, 1.0, {0.7, 0.0});
    EXPECT_EQ(free.ds_dt, 0.0);
    EXPECT_EQ(free.di_dt, 0.0);
    const Derivative locked = derivatives(ref::kParams, 0.0, {0.5, 0.2});
    EXPECT_EQ(locked.ds_dt, 0.0);
    EXPECT_DOUBLE_EQ(locked.di_dt, -0.1 * 0.2);
}

TEST(Phi, Values) {
    EXPECT_DOUBLE_EQ(phi(2.9, {1.0, 0.0}), 1.0);
    EXPECT_DOUBLE_EQ(phi(0.3, {1.0, 0.0}), 1.0);
    EXPECT_NEAR(phi(2.9, {0.34483, 0.0}), ref::kPhiAtHerd, 1e-14);
    EXPECT_THROW(phi(2.9, {0.0, 0.1}), ValidationError);
    EXPECT_THROW(phi(2.9, {-0.1, 0.1}), ValidationError);
}

TEST(SHerd, Values) {
    EXPECT_NEAR(s_herd(ref::kParams), 0.3448, 5e-5);
    EXPECT_DOUBLE_EQ(s_herd({0.2, 0.1}), 0.5);
    EXPECT_NEAR(s_herd({0.15, 0.1}), 2.0 / 3.0, 1e-15);
}

TEST(Integrate, RejectsBadInputs) {
    const auto none = LockdownPolicy::uncontrolled();
    EXPECT_THROW(integrate(ref::kParams, none, ref::kX0, 10.0, 0.0), ValidationError);
    EXPECT_THROW(integrate(ref::kParams, none, ref::kX0, 10.0, -0.1), ValidationError);
    EXPECT_THROW(integrate(ref::kParams, none, ref::kX0, 0.0, 0.01), ValidationError);
    EXPECT_THROW(integrate(ref::kParams, none, {1.0, 0.0}, 10.0, 0.01, true), ValidationError);
    EXPECT_THROW(integrate(ref::kParams, none, {0.9, 0.2}, 10.0, 0.01), ValidationError);
    EXPECT_THROW(integrate({-1.0, 0.1}, none, ref::kX0, 10.0, 0.01), ValidationError);
}

TEST(Integrate, NoInfectionKeepsSConstant) {
    const Trajectory traj = integrate(ref::kParams, {0.3, 20.0, 40.0}, {0.8, 0.0}, 200.0, 0.01);
    for (const auto& x : traj.states) {
        EXPECT_EQ(x.s, 0.8);
        EXPECT_EQ(x.i, 0.0);
    }
}

TEST(Integrate, UncontrolledRunReachesHerdThresholdAtCrossingTime) {
    // The uncontrolled run crosses S_herd at the oracle time.
    const EndPoint end = integrate_to(ref::kParams, LockdownPolicy::uncontrolled(), ref::kX0,
                                      ref::kHerdTime, 0.01);
    EXPECT_NEAR(end.state.s, ref::kParams.s_herd(), 1e-6);

    // With the ten-fold smaller i0, S(74.3) ~ S_herd ~ 0.34.
    const EndPoint small = integrate_to(ref::kParams, LockdownPolicy::uncontrolled(), ref::kX0Small,
                                        74.3, 0.01);
    EXPECT_NEAR(small.state.s, 0.3458816153745496, 1e-6);
    EXPECT_NEAR(small.state.s, 0.34, 0.01);
}

TEST(Integrate, SwitchTimesAreNodesAndTimesIncrease) {
    const LockdownPolicy p{0.231, 59.987, 30.0031};
    const Trajectory traj = integrate(ref::kParams, p, ref::kX0, 200.0, 0.01, true);
    ASSERT_EQ(traj.times.size(), traj.states.size());
    ASSERT_TRUE(traj.aux_inv_i.has_value());
    ASSERT_EQ(traj.aux_inv_i->size(), traj.size());
    EXPECT_EQ(traj.times.front(), 0.0);
    EXPECT_EQ(traj.times.back(), 200.0);
    EXPECT_NE(std::find(traj.times.begin(), traj.times.end(), p.t_start), traj.times.end());
    EXPECT_NE(std::find(traj.times.begin(), traj.times.end(), p.t_end()), traj.times.end());
    for (std::size_t k = 1; k < traj.size(); ++k) {
        EXPECT_GT(traj.times[k], traj.times[k - 1]);
        EXPECT_LE(traj.times[k] - traj.times[k - 1], 0.01 + 1e-12);
    }
}

TEST(Integrate, AuxiliaryChannelMatchesClosedFormUnderTotalLockdown) {
    // alpha = 0: I(s) = I(T) exp(-gamma (s - T)) on the lockdown, so
    // int_T^{T+D} ds / I = (exp(gamma D) - 1) / (gamma I(T)).
    const LockdownPolicy p{0.0, 40.0, 30.0};
    const Trajectory traj = integrate(ref::kParams, p, ref::kX0, 100.0, 0.01, true);
    const auto& aux = *traj.aux_inv_i;
    const auto at = [&](double t) {
        return static_cast<std::size_t>(std::find(traj.times.begin(), traj.times.end(), t) - traj.times.begin());
    };
    const std::size_t k_start = at(40.0);
    const std::size_t k_end = at(70.0);
    const double i_start = traj.states[k_start].i;
    const double expected = std::expm1(0.1 * 30.0) / (0.1 * i_start);
    EXPECT_EQ(aux[k_start], 0.0);
    EXPECT_NEAR(aux[k_end] / expected, 1.0, 1e-10);
    EXPECT_EQ(aux.back(), aux[k_end]);
    EXPECT_EQ(traj.states[k_end].s, traj.states[k_start].s);
}

namespace {

double max_phi_drift(const Trajectory& traj, double r, double t0, double t1) {
    double level = 0.0;
    bool have = false;
    double drift = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t < t0 || t > t1)
            continue;
        const double v = phi(r, traj.states[k]);
        if (!have) {
            level = v;
            have = true;
        }
        drift = std::max(drift, std::abs(v - level));
    }
    return drift;
}

} // namespace

TEST(Integrate, PhiConservedOnEachConstantControlSegment) {
    const double r0 = ref::kParams.r0();
    const Trajectory free = integrate(ref::kParams, LockdownPolicy::uncontrolled(), ref::kX0, 500.0, 0.01);
    EXPECT_LE(max_phi_drift(free, r0, 0.0, 500.0), 1e-8);

    const LockdownPolicy p{0.231, 60.0, 90.0};
    const Trajectory traj = integrate(ref::kParams, p, ref::kX0, 500.0, 0.01);
    EXPECT_LE(max_phi_drift(traj, r0, 0.0, 60.0), 1e-8);
    EXPECT_LE(max_phi_drift(traj, 0.231 * r0, 60.0, 150.0), 1e-8);
    EXPECT_LE(max_phi_drift(traj, r0, 150.0, 500.0), 1e-8);
    // Phi with the wrong reproduction number is not conserved across the lockdown.
    EXPECT_GT(max_phi_drift(traj, r0, 60.0, 150.0), 1e-3);
}

TEST(Integrate, ObservedOrderIsFourth) {
    const LockdownPolicy p{0.231, 59.3, 30.0};
    auto s_end = [&](double dt) { return integrate_to(ref::kParams, p, ref::kX0, 150.0, dt).state.s; };
    const double a = s_end(0.4);
    const double b = s_end(0.2);
    const double c = s_end(0.1);
    const double order = std::log2(std::abs(a - b) / std::abs(b - c));
    EXPECT_GE(order, 3.5);
    EXPECT_LE(order, 4.5);
}

TEST(Integrate, DriftOutOfSimplexIsReported) {
    // A step far beyond RK4 stability.
    EXPECT_THROW(integrate({50.0, 0.1}, LockdownPolicy::uncontrolled(), {0.5, 0.4}, 10.0, 1.0), SolverError);
}

TEST(IntegrateProperty, MonotoneSPositiveIAndSimplexOnRandomPolicies) {
    std::mt19937 rng(20200317);
    std::uniform_real_distribution<double> r0_dist(1.2, 8.0);
    std::uniform_real_distribution<double> alpha_dist(0.0, 1.0);
    std::uniform_real_distribution<double> start_dist(0.0, 150.0);
    std::uniform_real_distribution<double> dur_dist(0.5, 200.0);
    std::uniform_real_distribution<double> log_i0(-8.0, -1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double gamma = 0.1;
        const ModelParams params{r0_dist(rng) * gamma, gamma};
        const double i0 = std::pow(10.0, log_i0(rng));
        const EpidemicState x0{1.0 - i0, i0};
        const LockdownPolicy p{alpha_dist(rng), start_dist(rng), dur_dist(rng)};
        const Trajectory traj = integrate(params, p, x0, 500.0, 0.05);
        for (std::size_t k = 1; k < traj.size(); ++k) {
            const auto& prev = traj.states[k - 1];
            const auto& x = traj.states[k];
            ASSERT_LE(x.s, prev.s) << "trial " << trial << " t=" << traj.times[k];
            ASSERT_GT(x.i, 0.0) << "trial " << trial << " t=" << traj.times[k];
            ASSERT_LE(x.s + x.i, 1.0 + 1e-9);
        }
    }
}
