#pragma once

// Epidemic final size S_inf = lim S(t) from the conserved quantity:
// once the control is constant (u = 1 after a lockdown, or u = alpha forever)
// Phi_r(S_inf, 0) = Phi_r(x) for any state x on the trajectory, and Phi_r(., 0)
// is strictly decreasing on (0, 1/r], which makes bisection unconditional.

#include "lockdown/errors.hpp"
#include "lockdown/sir_core.hpp"

#include <cmath>
#include <sstream>

namespace lockdown {

inline constexpr double kDefaultFinalSizeTol = 1e-10;

struct FinalSizeQuery {
    ModelParams params;
    EpidemicState terminal_state;
};

namespace detail {

/// Root of Phi_r(S, 0) = target on (0, upper], upper <= 1/r.
inline double solve_final_size(double r, double target, double upper, double tol) {
    if (!(tol > 0.0))
        throw ValidationError("final-size tolerance must be positive");
    auto level = [r](double s) { return s - std::log(s) / r; };

    double lo = 0.5 * upper;
    int halvings = 0;
    while (!(level(lo) > target)) {
        if (++halvings > 200) {
            std::ostringstream msg;
            msg << "no final-size bracket below " << upper << " after 200 halvings (target level "
                << target << ")";
            throw SolverError(msg.str(), std::make_pair(lo, upper));
        }
        lo *= 0.5;
    }
    double hi = upper;
    // Hard cap guards tolerances below the spacing of doubles near the root.
    for (int it = 0; hi - lo >= tol && it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (level(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// S_inf reached from `terminal_state` under free dynamics (u == 1).
inline double final_size_from_state(const FinalSizeQuery& q, double tol = kDefaultFinalSizeTol) {
    q.params.validate();
    const EpidemicState& x = q.terminal_state;
    if (!(x.s > 0.0) || !std::isfinite(x.s))
        throw ValidationError("final size needs terminal s > 0");
    if (x.i < 0.0 || !std::isfinite(x.i))
        throw SolverError("terminal state has negative or non-finite infected proportion");
    if (!(tol > 0.0))
        throw ValidationError("final-size tolerance must be positive");
    // i == 0 is an equilibrium: nothing moves.
    if (x.i == 0.0)
        return x.s;
    const double r = q.params.r0();
    const double upper = std::min(q.params.s_herd(), x.s);
    return detail::solve_final_size(r, phi(r, x), upper, tol);
}

/// Run the policy to the end of its lockdown, then let the free system burn out.
inline double final_size_of_policy(const ModelParams& params, const LockdownPolicy& policy,
                                   const EpidemicState& x0, double dt,
                                   double tol = kDefaultFinalSizeTol) {
    params.validate();
    policy.validate();
    x0.validate();
    const double horizon = policy.t_end();
    if (!(horizon > 0.0))
        return final_size_from_state({params, x0}, tol);
    const EndPoint end = integrate_to(params, policy, x0, horizon, dt);
    return final_size_from_state({params, end.state}, tol);
}

/// Critical intensity: at or below it an arbitrarily long lockdown can bring
/// S_inf arbitrarily close to the herd threshold.
inline double alpha_bar(const ModelParams& params, const EpidemicState& x0) {
    params.validate();
    x0.validate();
    const double sh = params.s_herd();
    if (!(x0.s > sh))
        throw ValidationError("critical intensity is defined only for s0 > S_herd");
    const double value = sh / (x0.s + x0.i - sh) * (std::log(x0.s) - std::log(sh));
    if (!(value > 0.0 && value < 1.0)) {
        std::ostringstream msg;
        msg << "critical intensity " << value << " outside (0, 1)";
        throw SolverError(msg.str());
    }
    return value;
}

/// S_inf(alpha * 1): limit under a permanent constant control u == alpha.
inline double final_size_constant_control(const ModelParams& params, double alpha,
                                          const EpidemicState& x0,
                                          double tol = kDefaultFinalSizeTol) {
    params.validate();
    x0.validate();
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ValidationError("constant-control final size needs alpha in (0, 1]");
    if (x0.i == 0.0)
        return x0.s;
    const double r = alpha * params.r0();
    const double upper = std::min(1.0 / r, x0.s);
    return detail::solve_final_size(r, phi(r, x0), upper, tol);
}

} // namespace lockdown
