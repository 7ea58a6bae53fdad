#pragma once

// Controlled SIR dynamics
//
//   dS/dt = -u(t) beta S I
//   dI/dt =  u(t) beta S I - gamma I
//
// with u a bang-bang lockdown profile (alpha on [T, T+D], 1 elsewhere), a
// fixed-step RK4 integrator that splits exactly at the control switches, and
// the quantity  Phi_r(S, I) = S + I - ln(S)/r  which is conserved on every
// segment where u is constant and r = u beta / gamma.

#include "lockdown/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lockdown {

/// Epidemiological rates, both in 1/day.
struct ModelParams {
    double beta = 0.29;
    double gamma = 0.1;

    double r0() const noexcept { return beta / gamma; }
    double s_herd() const noexcept { return gamma / beta; }

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw ValidationError("beta must be a positive finite rate");
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw ValidationError("gamma must be a positive finite rate");
    }
};

/// Susceptible and infected proportions; removed is implicit (1 - s - i).
struct EpidemicState {
    double s = 1.0;
    double i = 0.0;

    double r() const noexcept { return 1.0 - s - i; }

    // Small slack on the simplex bound so that S0 = 1 - I0 is accepted.
    static constexpr double kSimplexSlack = 1e-12;

    bool valid() const noexcept {
        return std::isfinite(s) && std::isfinite(i) && s > 0.0 && s <= 1.0 && i >= 0.0 &&
               i <= 1.0 && s + i <= 1.0 + kSimplexSlack;
    }

    void validate() const {
        if (!valid()) {
            std::ostringstream msg;
            msg << "invalid epidemic state (s=" << s << ", i=" << i
                << "); need 0 < s <= 1, 0 <= i <= 1, s + i <= 1";
            throw ValidationError(msg.str());
        }
    }
};

/// Finite-duration lockdown u_{T,T+D}: alpha on the closed interval
/// [t_start, t_start + duration], 1 elsewhere.
struct LockdownPolicy {
    double alpha = 0.0;
    double t_start = 0.0;
    double duration = 0.0;

    double t_end() const noexcept { return t_start + duration; }

    /// u == 1 everywhere.
    static LockdownPolicy uncontrolled() noexcept { return {1.0, 0.0, 0.0}; }

    /// u == alpha on [0, horizon].
    static LockdownPolicy constant(double alpha, double horizon) noexcept {
        return {alpha, 0.0, horizon};
    }

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw ValidationError("lockdown intensity alpha must lie in [0, 1]");
        if (!(t_start >= 0.0) || !std::isfinite(t_start))
            throw ValidationError("lockdown start must be a finite time >= 0");
        if (!(duration >= 0.0) || !std::isfinite(duration))
            throw ValidationError("lockdown duration must be finite and >= 0");
    }
};

/// Sampled solution. aux_inv_i holds the running integral of 1/I over the
/// lockdown interval (zero before it, frozen after it) when requested.
struct Trajectory {
    std::vector<double> times;
    std::vector<EpidemicState> states;
    std::optional<std::vector<double>> aux_inv_i;

    std::size_t size() const noexcept { return times.size(); }
    const EpidemicState& final_state() const { return states.back(); }
};

struct Derivative {
    double ds_dt = 0.0;
    double di_dt = 0.0;
};

inline double control_value(const LockdownPolicy& policy, double t) noexcept {
    return (t >= policy.t_start && t <= policy.t_end()) ? policy.alpha : 1.0;
}

inline Derivative derivatives(const ModelParams& params, double u, const EpidemicState& x) noexcept {
    const double incidence = u * params.beta * x.s * x.i;
    return {-incidence, incidence - params.gamma * x.i};
}

inline double s_herd(const ModelParams& params) noexcept { return params.s_herd(); }

/// Phi_r(S, I) = S + I - ln(S) / r.
inline double phi(double r, const EpidemicState& x) {
    if (!(x.s > 0.0))
        throw ValidationError("phi requires s > 0");
    if (!(r > 0.0))
        throw ValidationError("phi requires r > 0");
    return x.s + x.i - std::log(x.s) / r;
}

/// End point of an integration run, without the sample history.
struct EndPoint {
    EpidemicState state;
    double aux_inv_i = 0.0;
};

namespace detail {

inline constexpr double kDriftTolerance = 1e-9;

struct Node {
    EpidemicState x;
    double w = 0.0;
};

inline void check_drift(const EpidemicState& x, double t) {
    if (std::isfinite(x.s) && std::isfinite(x.i) && x.s > 0.0 && x.i >= -kDriftTolerance &&
        x.s + x.i <= 1.0 + kDriftTolerance)
        return;
    std::ostringstream msg;
    msg.precision(17);
    msg << "integration left the simplex at t=" << t << " (s=" << x.s << ", i=" << x.i << ")";
    throw SolverError(msg.str());
}

inline std::size_t step_count(double length, double dt) {
    const double n = std::ceil(length / dt - 1e-9);
    return n < 1.0 ? std::size_t{1} : static_cast<std::size_t>(n);
}

/// Classical RK4 across [t0, t1] with constant control u, using
/// ceil((t1 - t0)/dt) equal steps. `observe(t, node)` sees every node after
/// the first; the last node lands exactly on t1.
template <typename Observer>
Node rk4_segment(const ModelParams& params, double u, Node node, double t0, double t1, double dt,
                 bool with_aux, Observer&& observe) {
    if (!(t1 > t0))
        return node;
    const std::size_t n = step_count(t1 - t0, dt);
    const double h = (t1 - t0) / static_cast<double>(n);

    auto rhs = [&](const EpidemicState& x) -> std::array<double, 3> {
        const Derivative d = derivatives(params, u, x);
        return {d.ds_dt, d.di_dt, with_aux ? 1.0 / x.i : 0.0};
    };

    for (std::size_t k = 0; k < n; ++k) {
        const EpidemicState& x = node.x;
        const auto k1 = rhs(x);
        const auto k2 = rhs({x.s + 0.5 * h * k1[0], x.i + 0.5 * h * k1[1]});
        const auto k3 = rhs({x.s + 0.5 * h * k2[0], x.i + 0.5 * h * k2[1]});
        const auto k4 = rhs({x.s + h * k3[0], x.i + h * k3[1]});
        node.x.s += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        node.x.i += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        node.w += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        const double t = (k + 1 == n) ? t1 : t0 + static_cast<double>(k + 1) * h;
        check_drift(node.x, t);
        observe(t, node);
    }
    return node;
}

struct Segment {
    double t0;
    double t1;
    double u;
    bool lockdown;
};

/// Constant-control pieces of [0, t_end], split at the policy switches.
inline std::vector<Segment> segments(const LockdownPolicy& policy, double t_end) {
    std::array<double, 4> cuts{0.0, std::min(policy.t_start, t_end), std::min(policy.t_end(), t_end),
                               t_end};
    std::vector<Segment> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        if (!(b > a))
            continue;
        const bool inside = policy.duration > 0.0 && a >= policy.t_start && b <= policy.t_end();
        out.push_back({a, b, inside ? policy.alpha : 1.0, inside});
    }
    return out;
}

template <typename Observer>
Node march(const ModelParams& params, const LockdownPolicy& policy, const EpidemicState& x0,
           double t_end, double dt, bool with_aux, Observer&& observe) {
    params.validate();
    policy.validate();
    x0.validate();
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ValidationError("time step dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw ValidationError("t_end must be positive");
    if (with_aux && !(x0.i > 0.0))
        throw ValidationError("the 1/I auxiliary channel needs i0 > 0");

    Node node{x0, 0.0};
    for (const Segment& seg : segments(policy, t_end))
        node = rk4_segment(params, seg.u, node, seg.t0, seg.t1, dt, with_aux && seg.lockdown, observe);
    return node;
}

} // namespace detail

/// RK4 solution of the controlled system on [0, t_end] with nodes at every
/// step and at both control switches.
inline Trajectory integrate(const ModelParams& params, const LockdownPolicy& policy,
                            const EpidemicState& x0, double t_end, double dt, bool with_aux = false) {
    Trajectory traj;
    const double steps = t_end / dt;
    const std::size_t expected =
        std::isfinite(steps) && steps > 0.0 && steps < 1e8 ? static_cast<std::size_t>(steps) + 4 : 16;
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    std::vector<double> aux;
    if (with_aux) {
        aux.reserve(expected);
        aux.push_back(0.0);
    }
    detail::march(params, policy, x0, t_end, dt, with_aux, [&](double t, const detail::Node& node) {
        traj.times.push_back(t);
        traj.states.push_back(node.x);
        if (with_aux)
            aux.push_back(node.w);
    });
    if (with_aux)
        traj.aux_inv_i = std::move(aux);
    return traj;
}

/// Same arithmetic as integrate(), keeping only the final node.
inline EndPoint integrate_to(const ModelParams& params, const LockdownPolicy& policy,
                             const EpidemicState& x0, double t_end, double dt, bool with_aux = false) {
    const detail::Node last =
        detail::march(params, policy, x0, t_end, dt, with_aux, [](double, const detail::Node&) {});
    return {last.x, last.w};
}

} // namespace lockdown
