#pragma once

// Command-line front end: optimize, trajectory, sweep and tables.
//
// Configuration is a flat key/value document whose keys are the long flag
// names (without the leading dashes). Values are resolved as
//   built-in defaults  <-  --config <file.json>  <-  explicit flags.

#include "lockdown/errors.hpp"
#include "lockdown/final_size.hpp"
#include "lockdown/optimizer.hpp"
#include "lockdown/sir_core.hpp"
#include "lockdown/sweep.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lockdown::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kValidationError = 2, kSolverError = 3 };

using Json = nlohmann::ordered_json;

struct RunConfig {
    // epidemic
    double beta = 0.29;
    double gamma = 0.1;
    double i0 = kDefaultI0;
    std::optional<double> s0;  ///< defaults to 1 - i0
    std::optional<double> r0;  ///< tables only; defaults to 2.9

    // lockdown
    double alpha = 0.0;
    double duration = 30.0;
    std::optional<double> t_start;  ///< trajectory only; optimal start when absent
    double alpha_lock = 0.231;      ///< tables only

    // trajectory sampling
    double t_end = 365.0;
    int stride = 100;

    // grids
    std::vector<double> r0_grid{1.5, 2.5, 4.5};
    std::vector<double> alpha_grid{0.0, 0.2, 0.4, 0.6, 0.8};
    std::vector<double> d_grid{30.0, 60.0, 90.0};
    double base_gamma = kReferenceGamma;

    // solver
    double dt = 0.01;
    double tol_t = 1e-3;
    int max_iter = 200;
    std::string algorithm = "bisection";
    int threads = 1;

    // output
    std::string format = "csv";
    std::string output;
    int precision = 10;

    double initial_s() const { return s0.value_or(1.0 - i0); }
    EpidemicState initial_state() const { return {initial_s(), i0}; }

    bool operator==(const RunConfig&) const = default;
};

enum class Kind { number, integer, list, text };

/// Every configurable key, shared by flag parsing and JSON config files.
inline const std::map<std::string, Kind>& schema() {
    static const std::map<std::string, Kind> keys{
        {"beta", Kind::number},       {"gamma", Kind::number},       {"i0", Kind::number},
        {"s0", Kind::number},         {"r0", Kind::number},          {"alpha", Kind::number},
        {"duration", Kind::number},   {"t-start", Kind::number},     {"alpha-lock", Kind::number},
        {"t-end", Kind::number},      {"stride", Kind::integer},     {"r0-grid", Kind::list},
        {"alpha-grid", Kind::list},   {"d-grid", Kind::list},        {"base-gamma", Kind::number},
        {"dt", Kind::number},         {"tol-t", Kind::number},       {"max-iter", Kind::integer},
        {"algorithm", Kind::text},    {"threads", Kind::integer},    {"format", Kind::text},
        {"output", Kind::text},       {"precision", Kind::integer},
    };
    return keys;
}

inline std::string flag_help(const std::string& key) {
    static const std::map<std::string, std::string> text{
        {"beta", "transmission rate (default 0.29)"},
        {"gamma", "removal rate (default 0.1)"},
        {"i0", "initial infected fraction (default 1.49e-5)"},
        {"s0", "initial susceptible fraction (default 1 - i0)"},
        {"r0", "basic reproduction number; beta = r0 * gamma (default 2.9)"},
        {"alpha", "lockdown intensity in [0, 1) (default 0)"},
        {"duration", "lockdown length D in days (default 30)"},
        {"t-start", "lockdown start; optimal start when omitted"},
        {"alpha-lock", "intensity of the partial-lockdown table (default 0.231)"},
        {"t-end", "simulation horizon in days (default 365)"},
        {"stride", "keep every n-th integrator node (default 100)"},
        {"r0-grid", "comma-separated R0 values (default 1.5,2.5,4.5)"},
        {"alpha-grid", "comma-separated intensities (default 0,0.2,0.4,0.6,0.8)"},
        {"d-grid", "comma-separated durations in days (default 30,60,90)"},
        {"base-gamma", "removal rate of sweep points (default 0.1)"},
        {"dt", "RK4 step in days (default 0.01)"},
        {"tol-t", "tolerance on T* in days (default 1e-3)"},
        {"max-iter", "iteration cap of the T* search (default 200)"},
        {"algorithm", "bisection | trisection (default bisection)"},
        {"threads", "worker threads (default 1)"},
        {"format", "csv | json (default csv)"},
        {"output", "write to this file instead of stdout"},
        {"precision", "significant digits in CSV (default 10)"},
    };
    const auto it = text.find(key);
    return it == text.end() ? std::string{} : it->second;
}

inline Json to_json(const RunConfig& c) {
    Json j;
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["i0"] = c.i0;
    if (c.s0)
        j["s0"] = *c.s0;
    if (c.r0)
        j["r0"] = *c.r0;
    j["alpha"] = c.alpha;
    j["duration"] = c.duration;
    if (c.t_start)
        j["t-start"] = *c.t_start;
    j["alpha-lock"] = c.alpha_lock;
    j["t-end"] = c.t_end;
    j["stride"] = c.stride;
    j["r0-grid"] = c.r0_grid;
    j["alpha-grid"] = c.alpha_grid;
    j["d-grid"] = c.d_grid;
    j["base-gamma"] = c.base_gamma;
    j["dt"] = c.dt;
    j["tol-t"] = c.tol_t;
    j["max-iter"] = c.max_iter;
    j["algorithm"] = c.algorithm;
    j["threads"] = c.threads;
    j["format"] = c.format;
    j["output"] = c.output;
    j["precision"] = c.precision;
    return j;
}

namespace detail {

inline double as_number(const std::string& key, const Json& v) {
    if (!v.is_number())
        throw ValidationError("config key '" + key + "' must be a number");
    return v.get<double>();
}

inline int as_integer(const std::string& key, const Json& v) {
    if (!v.is_number_integer())
        throw ValidationError("config key '" + key + "' must be an integer");
    return v.get<int>();
}

inline std::vector<double> as_list(const std::string& key, const Json& v) {
    if (!v.is_array())
        throw ValidationError("config key '" + key + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& e : v)
        out.push_back(as_number(key, e));
    return out;
}

inline std::string as_text(const std::string& key, const Json& v) {
    if (!v.is_string())
        throw ValidationError("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace detail

/// Overlays the keys present in `j` onto `c`. Unknown keys are rejected.
inline void apply_json(RunConfig& c, const Json& j) {
    if (!j.is_object())
        throw ValidationError("config document must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        using namespace detail;
        if (key == "beta") c.beta = as_number(key, v);
        else if (key == "gamma") c.gamma = as_number(key, v);
        else if (key == "i0") c.i0 = as_number(key, v);
        else if (key == "s0") c.s0 = as_number(key, v);
        else if (key == "r0") c.r0 = as_number(key, v);
        else if (key == "alpha") c.alpha = as_number(key, v);
        else if (key == "duration") c.duration = as_number(key, v);
        else if (key == "t-start") c.t_start = as_number(key, v);
        else if (key == "alpha-lock") c.alpha_lock = as_number(key, v);
        else if (key == "t-end") c.t_end = as_number(key, v);
        else if (key == "stride") c.stride = as_integer(key, v);
        else if (key == "r0-grid") c.r0_grid = as_list(key, v);
        else if (key == "alpha-grid") c.alpha_grid = as_list(key, v);
        else if (key == "d-grid") c.d_grid = as_list(key, v);
        else if (key == "base-gamma") c.base_gamma = as_number(key, v);
        else if (key == "dt") c.dt = as_number(key, v);
        else if (key == "tol-t") c.tol_t = as_number(key, v);
        else if (key == "max-iter") c.max_iter = as_integer(key, v);
        else if (key == "algorithm") c.algorithm = as_text(key, v);
        else if (key == "threads") c.threads = as_integer(key, v);
        else if (key == "format") c.format = as_text(key, v);
        else if (key == "output") c.output = as_text(key, v);
        else if (key == "precision") c.precision = as_integer(key, v);
        else throw ValidationError("unknown config key '" + key + "'");
    }
}

inline RunConfig from_json(const Json& j) {
    RunConfig c;
    apply_json(c, j);
    return c;
}

/// Converts a raw flag string into the JSON value its key expects.
inline Json parse_flag_value(const std::string& key, const std::string& raw) {
    auto number = [&](const std::string& text) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size())
            throw ValidationError("--" + key + ": '" + text + "' is not a number");
        return v;
    };
    switch (schema().at(key)) {
    case Kind::number:
        return number(raw);
    case Kind::integer: {
        const double v = number(raw);
        if (v != std::floor(v))
            throw ValidationError("--" + key + " must be an integer");
        return static_cast<int>(v);
    }
    case Kind::list: {
        Json arr = Json::array();
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty())
                arr.push_back(number(item));
        return arr;
    }
    case Kind::text:
        return raw;
    }
    return raw;
}

// ---------------------------------------------------------------------------
// validation

inline void require(bool ok, const std::string& message) {
    if (!ok)
        throw ValidationError(message);
}

inline void validate_common(const RunConfig& c) {
    require(c.format == "csv" || c.format == "json", "--format must be csv or json");
    require(c.precision >= 1 && c.precision <= 17, "--precision must lie in [1, 17]");
    require(c.dt > 0.0 && std::isfinite(c.dt), "--dt must be positive");
    require(c.tol_t > 0.0, "--tol-t must be positive");
    require(c.max_iter > 0, "--max-iter must be positive");
    require(c.threads >= 1, "--threads must be at least 1");
}

inline OptimProblem make_problem(const RunConfig& c) {
    OptimProblem p;
    p.params = {c.beta, c.gamma};
    p.alpha = c.alpha;
    p.duration = c.duration;
    p.x0 = c.initial_state();
    p.dt = c.dt;
    p.tol_T = c.tol_t;
    p.max_iter = c.max_iter;
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// output helpers

inline Json meta(const std::string& command, const RunConfig& c) {
    Json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["inputs"] = to_json(c);
    m["solver"] = {{"integrator", "rk4-fixed-step"},
                   {"dt", c.dt},
                   {"tol_t", c.tol_t},
                   {"max_iter", c.max_iter},
                   {"final_size_tol", kDefaultFinalSizeTol},
                   {"algorithm", c.algorithm}};
    return m;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& out, int precision) : out_(out) { out_ << std::setprecision(precision); }

    template <typename... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ","), put(cells), first = false), ...);
        out_ << '\n';
    }

private:
    void put(const std::string& s) { out_ << s; }
    void put(const char* s) { out_ << s; }
    void put(double v) { out_ << v; }
    void put(int v) { out_ << v; }
    void put(bool v) { out_ << (v ? "true" : "false"); }
    void put(const std::optional<double>& v) {
        if (v)
            out_ << *v;
    }
    void put(const std::optional<std::string>& v) {
        if (v)
            out_ << *v;
    }

    std::ostream& out_;
};

/// RFC 4180 quoting: wrap in quotes, double embedded quotes.
inline std::string csv_quote(const std::string& text) {
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"')
            out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// commands; each writes its document to `out`

inline void cmd_optimize(const RunConfig& c, std::ostream& out) {
    validate_common(c);
    require(c.algorithm == "bisection" || c.algorithm == "trisection",
            "--algorithm must be bisection or trisection");
    const OptimProblem prob = make_problem(c);
    const OptimResult res = c.algorithm == "bisection" ? optimize_bisection(prob) : optimize_trisection(prob);

    if (c.format == "json") {
        Json doc;
        doc["meta"] = meta("optimize", c);
        doc["results"] = {{"t_star", res.t_star},
                          {"s_inf", res.s_inf},
                          {"ratio_herd", res.ratio_herd},
                          {"boundary_case", to_string(res.boundary_case)},
                          {"c0", res.c0},
                          {"r0", prob.params.r0()},
                          {"s_herd", prob.params.s_herd()},
                          {"iterations", res.iterations},
                          {"t_upper", res.t_upper}};
        out << doc.dump(2) << '\n';
        return;
    }
    CsvWriter csv(out, c.precision);
    csv.row("t_star", "s_inf", "ratio_herd", "boundary_case", "c0", "iterations", "t_upper");
    csv.row(res.t_star, res.s_inf, res.ratio_herd, std::string(to_string(res.boundary_case)), res.c0,
            res.iterations, res.t_upper);
}

struct TrajectoryRow {
    double t, s, i, r, u;
};

/// Sampled (t, s, i, r, u) rows: every `stride`-th node plus the first,
/// the last and both control switches.
inline std::vector<TrajectoryRow> trajectory_rows(const RunConfig& c, LockdownPolicy& policy) {
    validate_common(c);
    require(c.stride >= 1, "--stride must be at least 1");
    require(c.t_end > 0.0, "--t-end must be positive");
    const ModelParams params{c.beta, c.gamma};
    params.validate();
    const EpidemicState x0 = c.initial_state();
    x0.validate();
    require(c.alpha >= 0.0 && c.alpha < 1.0, "--alpha must lie in [0, 1)");
    require(c.duration > 0.0, "--duration must be positive");

    double start = 0.0;
    if (c.t_start) {
        require(*c.t_start >= 0.0, "--t-start must be >= 0");
        start = *c.t_start;
    } else if (x0.i > 0.0) {
        start = optimize_bisection(make_problem(c)).t_star;
    }
    policy = {c.alpha, start, c.duration};

    const Trajectory traj = integrate(params, policy, x0, c.t_end, c.dt);
    std::vector<TrajectoryRow> rows;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        const bool keep = k % static_cast<std::size_t>(c.stride) == 0 || k + 1 == traj.size() ||
                          t == policy.t_start || t == policy.t_end();
        if (!keep)
            continue;
        const EpidemicState& x = traj.states[k];
        rows.push_back({t, x.s, x.i, x.r(), control_value(policy, t)});
    }
    return rows;
}

inline void cmd_trajectory(const RunConfig& c, std::ostream& out) {
    LockdownPolicy policy;
    const auto rows = trajectory_rows(c, policy);
    if (c.format == "json") {
        Json doc;
        doc["meta"] = meta("trajectory", c);
        Json arr = Json::array();
        for (const auto& r : rows)
            arr.push_back({{"t", r.t}, {"s", r.s}, {"i", r.i}, {"r", r.r}, {"u", r.u}});
        doc["results"] = {
            {"policy", {{"alpha", policy.alpha}, {"t_start", policy.t_start}, {"duration", policy.duration}}},
            {"rows", std::move(arr)}};
        out << doc.dump(2) << '\n';
        return;
    }
    CsvWriter csv(out, c.precision);
    csv.row("t", "s", "i", "r", "u");
    for (const auto& r : rows)
        csv.row(r.t, r.s, r.i, r.r, r.u);
}

inline SweepSpec make_sweep_spec(const RunConfig& c) {
    SweepSpec spec;
    spec.r0_values = c.r0_grid;
    spec.alpha_values = c.alpha_grid;
    spec.d_values = c.d_grid;
    spec.base_gamma = c.base_gamma;
    spec.x0 = c.initial_state();
    spec.dt = c.dt;
    spec.tol_T = c.tol_t;
    spec.max_iter = c.max_iter;
    spec.threads = static_cast<unsigned>(c.threads);
    spec.validate();
    return spec;
}

inline void cmd_sweep(const RunConfig& c, std::ostream& out) {
    validate_common(c);
    const auto rows = run_sweep(make_sweep_spec(c));
    if (c.format == "json") {
        Json doc;
        doc["meta"] = meta("sweep", c);
        Json arr = Json::array();
        for (const auto& r : rows)
            arr.push_back({{"r0", r.r0},
                           {"alpha", r.alpha},
                           {"d", r.d},
                           {"t_star", optional_number(r.t_star)},
                           {"s_inf", optional_number(r.s_inf)},
                           {"ratio_herd", optional_number(r.ratio_herd)},
                           {"alpha_bar_flag", r.alpha_bar_flag},
                           {"boundary_case", r.boundary_case},
                           {"error", r.error ? Json(*r.error) : Json(nullptr)}});
        doc["results"] = std::move(arr);
        out << doc.dump(2) << '\n';
        return;
    }
    CsvWriter csv(out, c.precision);
    csv.row("r0", "alpha", "d", "t_star", "s_inf", "ratio_herd", "alpha_bar_flag", "boundary_case", "error");
    for (const auto& r : rows) {
        std::optional<std::string> err;
        if (r.error)
            err = csv_quote(*r.error);
        csv.row(r.r0, r.alpha, r.d, r.t_star, r.s_inf, r.ratio_herd, r.alpha_bar_flag, r.boundary_case, err);
    }
}

/// Reference (D, T*, S_inf*, ratio) triples for R0 = 2.9, gamma = 0.1 and
/// i0 = 1.49e-5, for full lockdown and for alpha = 0.231.
struct ReferenceRow {
    double alpha;
    std::optional<double> d;
    std::optional<double> t_star;
    double s_inf;
    double ratio;
};

inline const std::vector<ReferenceRow>& reference_rows() {
    static const std::vector<ReferenceRow> rows{
        {0.0, std::nullopt, std::nullopt, 0.0668, 0.194}, {0.0, 30.0, 74.3, 0.255, 0.739},
        {0.0, 60.0, 74.3, 0.323, 0.937},                  {0.0, 90.0, 74.3, 0.340, 0.985},
        {0.231, std::nullopt, std::nullopt, 0.0668, 0.194}, {0.231, 30.0, 72.1, 0.222, 0.644},
        {0.231, 60.0, 71.5, 0.302, 0.875},                {0.231, 90.0, 71.3, 0.331, 0.959},
    };
    return rows;
}

inline const ReferenceRow* find_reference(double alpha, const std::optional<double>& d) {
    for (const auto& r : reference_rows())
        if (r.alpha == alpha && r.d == d)
            return &r;
    return nullptr;
}

struct TablesReport {
    struct Entry {
        double alpha;
        TableRow row;
        const ReferenceRow* reference;
    };
    std::vector<Entry> entries;
    double max_dev_t_star = 0.0;
    double max_dev_s_inf = 0.0;
    double max_dev_ratio = 0.0;
};

inline TablesReport tables_report(const RunConfig& c) {
    validate_common(c);
    const double r0 = c.r0.value_or(2.9);
    require(r0 > 1.0, "--r0 must exceed 1");
    require(c.alpha_lock > 0.0 && c.alpha_lock < 1.0, "--alpha-lock must lie in (0, 1)");
    for (double d : c.d_grid)
        require(d > 0.0, "--d-grid durations must be positive");
    const ModelParams params{r0 * c.gamma, c.gamma};
    params.validate();
    const EpidemicState x0 = c.initial_state();
    x0.validate();
    require(x0.i > 0.0, "--i0 must be positive for tables");

    TablesReport report;
    const TableSettings settings{c.dt, c.tol_t, c.max_iter};
    for (double alpha : {0.0, c.alpha_lock}) {
        for (const TableRow& row : table_rows(params, alpha, c.d_grid, x0, settings)) {
            const ReferenceRow* ref = find_reference(alpha, row.d);
            report.entries.push_back({alpha, row, ref});
            if (!ref)
                continue;
            if (ref->t_star && row.t_star)
                report.max_dev_t_star = std::max(report.max_dev_t_star, std::abs(*row.t_star - *ref->t_star));
            report.max_dev_s_inf = std::max(report.max_dev_s_inf, std::abs(row.s_inf - ref->s_inf));
            report.max_dev_ratio = std::max(report.max_dev_ratio, std::abs(row.ratio_herd - ref->ratio));
        }
    }
    return report;
}

inline void cmd_tables(const RunConfig& c, std::ostream& out) {
    const TablesReport report = tables_report(c);
    auto dev = [](const std::optional<double>& a, const std::optional<double>& b) -> std::optional<double> {
        if (a && b)
            return std::abs(*a - *b);
        return std::nullopt;
    };

    if (c.format == "json") {
        Json doc;
        doc["meta"] = meta("tables", c);
        Json tables = Json::array();
        for (double alpha : {0.0, c.alpha_lock}) {
            Json rows = Json::array();
            for (const auto& e : report.entries) {
                if (e.alpha != alpha)
                    continue;
                Json r{{"d", optional_number(e.row.d)},
                       {"t_star", optional_number(e.row.t_star)},
                       {"s_inf", e.row.s_inf},
                       {"ratio_herd", e.row.ratio_herd}};
                if (e.reference) {
                    r["reference"] = {{"t_star", optional_number(e.reference->t_star)},
                                      {"s_inf", e.reference->s_inf},
                                      {"ratio_herd", e.reference->ratio}};
                    r["deviation"] = {{"t_star", optional_number(dev(e.row.t_star, e.reference->t_star))},
                                      {"s_inf", std::abs(e.row.s_inf - e.reference->s_inf)},
                                      {"ratio_herd", std::abs(e.row.ratio_herd - e.reference->ratio)}};
                }
                rows.push_back(std::move(r));
            }
            tables.push_back({{"alpha", alpha}, {"rows", std::move(rows)}});
        }
        doc["results"] = {{"tables", std::move(tables)},
                          {"max_abs_deviation",
                           {{"t_star", report.max_dev_t_star},
                            {"s_inf", report.max_dev_s_inf},
                            {"ratio_herd", report.max_dev_ratio}}}};
        out << doc.dump(2) << '\n';
        return;
    }
    CsvWriter csv(out, c.precision);
    csv.row("alpha", "d", "t_star", "s_inf", "ratio_herd", "ref_t_star", "ref_s_inf", "ref_ratio_herd",
            "dev_t_star", "dev_s_inf", "dev_ratio_herd");
    for (const auto& e : report.entries) {
        const ReferenceRow* ref = e.reference;
        std::optional<double> ref_t, ref_s, ref_r, dev_s, dev_r;
        if (ref) {
            ref_t = ref->t_star;
            ref_s = ref->s_inf;
            ref_r = ref->ratio;
            dev_s = std::abs(e.row.s_inf - ref->s_inf);
            dev_r = std::abs(e.row.ratio_herd - ref->ratio);
        }
        csv.row(e.alpha, e.row.d, e.row.t_star, e.row.s_inf, e.row.ratio_herd, ref_t, ref_s, ref_r,
                dev(e.row.t_star, ref_t), dev_s, dev_r);
    }
}

// ---------------------------------------------------------------------------
// dispatch

inline Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config file '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Runs one CLI invocation. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal timing of a finite-duration lockdown in the SIR model", "lockdown"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    struct Command {
        const char* name;
        const char* help;
        std::vector<std::string> keys;
        void (*run)(const RunConfig&, std::ostream&);
    };
    const std::vector<std::string> common{"dt", "tol-t", "max-iter", "format", "output", "precision"};
    const std::vector<Command> commands{
        {"optimize", "Optimal lockdown start T* and final size for one scenario",
         {"beta", "gamma", "alpha", "duration", "i0", "s0", "algorithm"}, cmd_optimize},
        {"trajectory", "Time series (t, s, i, r, u) under the optimal or a given lockdown",
         {"beta", "gamma", "alpha", "duration", "i0", "s0", "t-start", "t-end", "stride"}, cmd_trajectory},
        {"sweep", "Optimal solutions over an (R0, alpha, D) grid",
         {"r0-grid", "alpha-grid", "d-grid", "base-gamma", "i0", "s0", "threads"}, cmd_sweep},
        {"tables", "Full-lockdown and partial-lockdown tables with deviations from reference values",
         {"r0", "gamma", "alpha-lock", "d-grid", "i0", "s0"}, cmd_tables},
    };

    std::map<std::string, std::string> raw;
    std::string config_path;
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_path, "JSON file of flag-name keys; flags override it");
        auto keys = cmd.keys;
        keys.insert(keys.end(), common.begin(), common.end());
        for (const auto& key : keys) {
            sub->add_option("--" + key, raw[key], flag_help(key))->expected(1);
        }
        subs.emplace_back(sub, &cmd);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationError;
    }

    for (const auto& [sub, cmd] : subs) {
        if (!sub->parsed())
            continue;
        try {
            RunConfig config;
            if (!config_path.empty())
                apply_json(config, load_config_file(config_path));
            Json flags = Json::object();
            for (const auto& key : cmd->keys)
                if (sub->count("--" + key) > 0)
                    flags[key] = parse_flag_value(key, raw[key]);
            for (const auto& key : common)
                if (sub->count("--" + key) > 0)
                    flags[key] = parse_flag_value(key, raw[key]);
            apply_json(config, flags);

            if (config.output.empty()) {
                cmd->run(config, out);
            } else {
                std::ostringstream buffer;
                cmd->run(config, buffer);
                std::ofstream file(config.output, std::ios::binary);
                if (!file)
                    throw ValidationError("cannot write output file '" + config.output + "'");
                file << buffer.str();
            }
            return kOk;
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << '\n';
            return kValidationError;
        } catch (const std::exception& e) {
            err << "solver error: " << e.what() << '\n';
            return kSolverError;
        }
    }
    return kValidationError;
}

} // namespace lockdown::cli
