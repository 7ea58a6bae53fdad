#pragma once

// Optimal start time T* of a lockdown of intensity alpha and duration D.
//
// The optimal control is u_{T*,T*+D}. With I^T the infected curve under
// u_{T,T+D}, define
//
//   psi(T) = 1 - I(T+D)/I(T) + (alpha - 1) gamma I(T+D) * int_T^{T+D} ds / I(s)
//
// psi is increasing; T* = 0 if psi(0) >= 0, otherwise T* is its unique root.
// Equivalently T* minimizes j(T) = Phi_{R0}(X^T(T+D)), which decreases then
// increases. Both searches run on [0, T_herd], where T_herd is the time the
// uncontrolled epidemic crosses S = S_herd; psi > 0 beyond it.

#include "lockdown/errors.hpp"
#include "lockdown/final_size.hpp"
#include "lockdown/sir_core.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

namespace lockdown {

enum class BoundaryCase { interior_root, at_zero, herd_crossing_alpha0, epidemic_subcritical };

inline std::string_view to_string(BoundaryCase c) noexcept {
    switch (c) {
    case BoundaryCase::interior_root:
        return "interior_root";
    case BoundaryCase::at_zero:
        return "at_zero";
    case BoundaryCase::herd_crossing_alpha0:
        return "herd_crossing_alpha0";
    case BoundaryCase::epidemic_subcritical:
        return "epidemic_subcritical";
    }
    return "unknown";
}

struct OptimProblem {
    ModelParams params;
    double alpha = 0.0;
    double duration = 30.0;
    EpidemicState x0{1.0 - 1.49e-5, 1.49e-5};
    double dt = 0.01;
    double tol_T = 1e-3;
    int max_iter = 200;
    double final_size_tol = kDefaultFinalSizeTol;

    LockdownPolicy policy_at(double t_start) const noexcept { return {alpha, t_start, duration}; }

    void validate() const {
        params.validate();
        if (!(params.r0() > 1.0))
            throw ValidationError("the optimal lockdown problem needs R0 = beta/gamma > 1");
        x0.validate();
        if (!(x0.i > 0.0))
            throw ValidationError("the optimal lockdown problem needs i0 > 0");
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw ValidationError("lockdown intensity alpha must lie in [0, 1)");
        if (!(duration > 0.0) || !std::isfinite(duration))
            throw ValidationError("lockdown duration must be positive");
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw ValidationError("time step dt must be positive");
        if (!(tol_T > 0.0))
            throw ValidationError("tol_T must be positive");
        if (max_iter <= 0)
            throw ValidationError("max_iter must be positive");
        if (!(final_size_tol > 0.0))
            throw ValidationError("final-size tolerance must be positive");
    }
};

struct OptimResult {
    double t_star = 0.0;
    double s_inf = 0.0;
    double ratio_herd = 0.0;
    double c0 = 0.0;  ///< Phi_{R0}(x0), the level conserved before the lockdown
    int iterations = 0;
    BoundaryCase boundary_case = BoundaryCase::interior_root;
    double t_upper = 0.0;  ///< upper end of the search bracket (herd crossing time)
};

namespace detail {

struct LockdownWindow {
    EpidemicState at_start;
    EpidemicState at_end;
    double inv_i_integral = 0.0;
};

/// States at T and T+D under u_{T,T+D}, from a single integration pass.
inline LockdownWindow lockdown_window(const OptimProblem& prob, double t, bool with_aux) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ValidationError("lockdown start must be a finite time >= 0");
    const LockdownPolicy policy = prob.policy_at(t);
    EpidemicState at_start = prob.x0;
    const Node last = march(prob.params, policy, prob.x0, policy.t_end(), prob.dt, with_aux,
                            [&](double time, const Node& node) {
                                if (time == policy.t_start)
                                    at_start = node.x;
                            });
    return {at_start, last.x, last.w};
}

} // namespace detail

inline double psi(const OptimProblem& prob, double t) {
    prob.params.validate();
    if (!(prob.x0.i > 0.0))
        throw ValidationError("psi needs i0 > 0");
    const detail::LockdownWindow win = detail::lockdown_window(prob, t, true);
    const double i_start = win.at_start.i;
    if (!(i_start > 0.0) || !std::isnormal(i_start))
        throw SolverError("I(T) underflowed; i0 too small for double range at this T");
    const double i_end = win.at_end.i;
    return 1.0 - i_end / i_start + (prob.alpha - 1.0) * prob.params.gamma * i_end * win.inv_i_integral;
}

/// j(T) = Phi_{R0}(X^T(T+D)); minimizing j maximizes the final size.
inline double j_cost(const OptimProblem& prob, double t) {
    const detail::LockdownWindow win = detail::lockdown_window(prob, t, false);
    return phi(prob.params.r0(), win.at_end);
}

/// c0 + (gamma/beta)(1/alpha - 1) ln(S(T+D)/S(T)); alpha > 0 only.
inline double j_cost_closed_form(const OptimProblem& prob, double t) {
    if (!(prob.alpha > 0.0))
        throw ValidationError("closed-form cost needs alpha > 0");
    const detail::LockdownWindow win = detail::lockdown_window(prob, t, false);
    const double c0 = phi(prob.params.r0(), prob.x0);
    return c0 + prob.params.s_herd() * (1.0 / prob.alpha - 1.0) *
                    std::log(win.at_end.s / win.at_start.s);
}

/// Time at which the uncontrolled run reaches S = S_herd, refined by bisecting
/// the length of the last RK4 step to within dt/100.
inline double herd_crossing_time(const ModelParams& params, const EpidemicState& x0, double dt) {
    params.validate();
    x0.validate();
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ValidationError("time step dt must be positive");
    const double sh = params.s_herd();
    if (!(x0.s > sh))
        throw ValidationError("no herd-immunity crossing: s0 <= S_herd");
    if (!(x0.i > 0.0))
        throw ValidationError("no herd-immunity crossing: i0 = 0");

    constexpr double kMaxHorizon = 1e6;
    auto no_observer = [](double, const detail::Node&) {};
    detail::Node node{x0, 0.0};
    double t = 0.0;
    for (;;) {
        const detail::Node next = detail::rk4_segment(params, 1.0, node, t, t + dt, dt, false, no_observer);
        if (next.x.s <= sh)
            break;
        node = next;
        t += dt;
        if (t > kMaxHorizon || !(node.x.i > std::numeric_limits<double>::min()))
            throw SolverError("uncontrolled run never crossed the herd-immunity threshold");
    }
    double lo = 0.0;
    double hi = dt;
    while (hi - lo > dt * 1e-2) {
        const double h = 0.5 * (lo + hi);
        const detail::Node probe = detail::rk4_segment(params, 1.0, node, 0.0, h, h, false, no_observer);
        if (probe.x.s > sh)
            lo = h;
        else
            hi = h;
    }
    return t + 0.5 * (lo + hi);
}

namespace detail {

inline OptimResult finish(const OptimProblem& prob, OptimResult res) {
    res.c0 = phi(prob.params.r0(), prob.x0);
    if (res.boundary_case == BoundaryCase::epidemic_subcritical)
        res.s_inf = final_size_from_state({prob.params, prob.x0}, prob.final_size_tol);
    else
        res.s_inf = final_size_of_policy(prob.params, prob.policy_at(res.t_star), prob.x0, prob.dt,
                                         prob.final_size_tol);
    res.ratio_herd = res.s_inf / prob.params.s_herd();
    return res;
}

inline bool subcritical(const OptimProblem& prob) { return !(prob.x0.s > prob.params.s_herd()); }

} // namespace detail

/// Root of psi by bisection on [0, T_herd].
inline OptimResult optimize_bisection(const OptimProblem& prob) {
    prob.validate();
    OptimResult res;
    if (detail::subcritical(prob)) {
        res.boundary_case = BoundaryCase::epidemic_subcritical;
        return detail::finish(prob, res);
    }
    res.t_upper = herd_crossing_time(prob.params, prob.x0, prob.dt);

    // psi vanishes identically for alpha = 0; the optimum is the herd crossing.
    if (prob.alpha == 0.0) {
        res.t_star = res.t_upper;
        res.boundary_case = BoundaryCase::herd_crossing_alpha0;
        return detail::finish(prob, res);
    }
    if (psi(prob, 0.0) >= 0.0) {
        res.boundary_case = BoundaryCase::at_zero;
        return detail::finish(prob, res);
    }

    double lo = 0.0;
    double hi = res.t_upper;
    while (hi - lo >= prob.tol_T) {
        if (res.iterations >= prob.max_iter) {
            std::ostringstream msg;
            msg << "psi bisection exceeded " << prob.max_iter << " iterations; bracket [" << lo << ", "
                << hi << "]";
            throw SolverError(msg.str(), std::make_pair(lo, hi));
        }
        ++res.iterations;
        const double mid = 0.5 * (lo + hi);
        if (psi(prob, mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    res.t_star = 0.5 * (lo + hi);
    res.boundary_case = BoundaryCase::interior_root;
    return detail::finish(prob, res);
}

/// Iterations of interval trisection needed to shrink `width` below `tol`.
inline int trisection_steps(double width, double tol) {
    if (!(width > tol))
        return 0;
    return static_cast<int>(std::ceil(std::log(width / tol) / std::log(1.5)));
}

/// Ternary search minimizing j on [0, T_herd].
inline OptimResult optimize_trisection(const OptimProblem& prob) {
    prob.validate();
    OptimResult res;
    if (detail::subcritical(prob)) {
        res.boundary_case = BoundaryCase::epidemic_subcritical;
        return detail::finish(prob, res);
    }
    res.t_upper = herd_crossing_time(prob.params, prob.x0, prob.dt);

    const int k = trisection_steps(res.t_upper, prob.tol_T);
    if (k > prob.max_iter) {
        std::ostringstream msg;
        msg << "trisection needs " << k << " iterations, above max_iter=" << prob.max_iter;
        throw SolverError(msg.str(), std::make_pair(0.0, res.t_upper));
    }
    double lo = 0.0;
    double hi = res.t_upper;
    for (int it = 0; it < k; ++it) {
        const double left = lo + (hi - lo) / 3.0;
        const double right = lo + 2.0 * (hi - lo) / 3.0;
        if (j_cost(prob, right) >= j_cost(prob, left))
            hi = right;
        else
            lo = left;
    }
    res.iterations = k;
    res.t_star = 0.5 * (lo + hi);
    if (prob.alpha == 0.0)
        res.boundary_case = BoundaryCase::herd_crossing_alpha0;
    else if (res.t_star < prob.tol_T)
        res.boundary_case = BoundaryCase::at_zero;
    else
        res.boundary_case = BoundaryCase::interior_root;
    return detail::finish(prob, res);
}

} // namespace lockdown
