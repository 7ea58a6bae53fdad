#pragma once

// Parameter sweeps over (R0, alpha, D) and the table layout.
//
// Every grid point is solved on the normalized system gamma' = 0.1/day:
//   beta' = (beta/gamma) 0.1,  D' = (gamma/0.1) D,  T* = (0.1/gamma) T'*,
// which leaves R0 and S_inf* unchanged.

#include "lockdown/errors.hpp"
#include "lockdown/final_size.hpp"
#include "lockdown/optimizer.hpp"
#include "lockdown/sir_core.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace lockdown {

inline constexpr double kReferenceGamma = 0.1;

struct NormalizedSystem {
    ModelParams params;
    double duration = 0.0;
    double time_scale = 1.0;  ///< T* = time_scale * T'*
};

inline NormalizedSystem normalize(double gamma, double beta, double duration) {
    if (!(gamma > 0.0))
        throw ValidationError("normalization needs gamma > 0");
    if (gamma == kReferenceGamma)
        return {{beta, gamma}, duration, 1.0};
    return {{beta / gamma * kReferenceGamma, kReferenceGamma},
            gamma / kReferenceGamma * duration,
            kReferenceGamma / gamma};
}

/// Solves `prob` on its normalized twin and maps T* back to the original time unit.
inline OptimResult optimize_normalized(const OptimProblem& prob) {
    prob.validate();
    const NormalizedSystem norm = normalize(prob.params.gamma, prob.params.beta, prob.duration);
    OptimProblem scaled = prob;
    scaled.params = norm.params;
    scaled.duration = norm.duration;
    OptimResult res = optimize_bisection(scaled);
    res.t_star *= norm.time_scale;
    res.t_upper *= norm.time_scale;
    return res;
}

inline constexpr double kDefaultI0 = 1.49e-5;

struct SweepSpec {
    std::vector<double> r0_values;
    std::vector<double> alpha_values;
    std::vector<double> d_values;
    double base_gamma = kReferenceGamma;
    EpidemicState x0{1.0 - kDefaultI0, kDefaultI0};
    double dt = 0.01;
    double tol_T = 1e-3;
    int max_iter = 200;
    unsigned threads = 1;

    void validate() const {
        if (r0_values.empty() || alpha_values.empty() || d_values.empty())
            throw ValidationError("sweep grids must be non-empty");
        for (double r : r0_values)
            if (!(r > 1.0))
                throw ValidationError("every sweep R0 must exceed 1");
        for (double a : alpha_values)
            if (!(a >= 0.0 && a < 1.0))
                throw ValidationError("every sweep alpha must lie in [0, 1)");
        for (double d : d_values)
            if (!(d > 0.0))
                throw ValidationError("every sweep duration must be positive");
        if (!(base_gamma > 0.0))
            throw ValidationError("base gamma must be positive");
        x0.validate();
        if (!(dt > 0.0) || !(tol_T > 0.0) || max_iter <= 0)
            throw ValidationError("sweep solver settings must be positive");
    }
};

struct SweepRow {
    double r0 = 0.0;
    double alpha = 0.0;
    double d = 0.0;
    std::optional<double> t_star;
    std::optional<double> s_inf;
    std::optional<double> ratio_herd;
    bool alpha_bar_flag = false;  ///< alpha < critical intensity for this (R0, x0)
    std::string boundary_case;
    std::optional<std::string> error;
};

inline SweepRow solve_grid_point(const SweepSpec& spec, double r0, double alpha, double d) {
    SweepRow row;
    row.r0 = r0;
    row.alpha = alpha;
    row.d = d;
    const ModelParams params{r0 * spec.base_gamma, spec.base_gamma};
    try {
        row.alpha_bar_flag = spec.x0.s > params.s_herd() && alpha < alpha_bar(params, spec.x0);
        OptimProblem prob;
        prob.params = params;
        prob.alpha = alpha;
        prob.duration = d;
        prob.x0 = spec.x0;
        prob.dt = spec.dt;
        prob.tol_T = spec.tol_T;
        prob.max_iter = spec.max_iter;
        const OptimResult res = optimize_normalized(prob);
        row.t_star = res.t_star;
        row.s_inf = res.s_inf;
        row.ratio_herd = res.ratio_herd;
        row.boundary_case = std::string(to_string(res.boundary_case));
    } catch (const std::exception& e) {
        row.boundary_case = "solver_error";
        row.error = e.what();
    }
    return row;
}

/// One row per grid point, ordered by (r0, alpha, d) ascending. Rows are
/// independent and may be solved on `spec.threads` workers; the output does
/// not depend on the thread count.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto r0s = sorted(spec.r0_values);
    const auto alphas = sorted(spec.alpha_values);
    const auto ds = sorted(spec.d_values);

    struct Point {
        double r0, alpha, d;
    };
    std::vector<Point> grid;
    grid.reserve(r0s.size() * alphas.size() * ds.size());
    for (double r : r0s)
        for (double a : alphas)
            for (double d : ds)
                grid.push_back({r, a, d});

    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < grid.size(); k = next++)
            rows[k] = solve_grid_point(spec, grid[k].r0, grid[k].alpha, grid[k].d);
    };
    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(grid.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
    }
    return rows;
}

/// A row of the (D, T*, S_inf*, S_inf*/S_herd) table; the leading
/// "no lockdown" row has no duration and no start time.
struct TableRow {
    std::optional<double> d;
    std::optional<double> t_star;
    double s_inf = 0.0;
    double ratio_herd = 0.0;
};

struct TableSettings {
    double dt = 0.01;
    double tol_T = 1e-3;
    int max_iter = 200;
};

inline std::vector<TableRow> table_rows(const ModelParams& params, double alpha,
                                        const std::vector<double>& d_values, const EpidemicState& x0,
                                        const TableSettings& settings = {}) {
    params.validate();
    x0.validate();
    std::vector<TableRow> rows;
    const double free = final_size_from_state({params, x0});
    rows.push_back({std::nullopt, std::nullopt, free, free / params.s_herd()});
    for (double d : d_values) {
        OptimProblem prob;
        prob.params = params;
        prob.alpha = alpha;
        prob.duration = d;
        prob.x0 = x0;
        prob.dt = settings.dt;
        prob.tol_T = settings.tol_T;
        prob.max_iter = settings.max_iter;
        const OptimResult res = optimize_bisection(prob);
        rows.push_back({d, res.t_star, res.s_inf, res.ratio_herd});
    }
    return rows;
}

} // namespace lockdown
