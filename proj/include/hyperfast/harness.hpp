#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "hyperfast/natmi.hpp"
#include "hyperfast/sliding.hpp"

namespace hyperfast {

/// Least-squares slope of log(f_k - f_star) against log k over rows with
/// k in [k_lo, k_hi]. Rows whose gap is not resolvable in double precision
/// (below 64 eps (1 + |f_star|)) are skipped; fewer than 3 usable rows throws.
double fit_rate(const Trace& trace, int k_lo, int k_hi, double f_star);

struct Reference {
    Vector x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iters = 0;
};

/// Damped Newton from x0 until |grad f| <= grad_tol. Throws SolverError when
/// `budget` Newton steps do not suffice.
Reference reference_solution(const Oracle& oracle, const VectorRef& x0, int budget = 200, double grad_tol = 1e-13);
double reference_fstar(const Oracle& oracle, const VectorRef& x0, int budget = 200);

/// Gradient descent with step 1/L, L from power iteration on the Hessian at x0
/// and raised on every failed sufficient-decrease test.
Trace baseline_gd(OraclePtr oracle, const VectorRef& x0, int steps, const TraceCallback& on_row = {});

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration(const MatrixRef& m, int iters = 200);

enum class Method { hyperfast, natmi_exact, sliding, gd };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct RunConfig {
    std::string problem = "quartic1d";
    Method method = Method::hyperfast;
    double eps = 1e-10;
    int max_iters = 30;
    double grad_tol = 0.0;
    std::optional<double> gamma;
    std::optional<double> xi;
    std::optional<double> c_delta;
    int inner_max_iters = 10000;  ///< cap on inner (BDGM) iterations per subproblem
    std::uint64_t seed = 7;

    Eigen::Index n = 0;  ///< 0 picks the problem's default
    Eigen::Index m = 200;
    double ridge = 1e-3;
    double a4 = 1.0;
    double ratio = 1e-3;  ///< L3(g) / L3(h) for the sliding benchmark
    std::string data;     ///< LIBSVM file for logreg; synthetic data when empty
    std::optional<double> f_star;
    int fit_lo = 3;

    std::string trace_path;
    std::string summary_path;
    bool timing = false;

    /// Throws ConfigError when the method cannot run on the problem.
    void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
/// Unknown keys, duplicate keys and malformed values throw ConfigError.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);

/// Applies one key to the config, with the same checks as the file parser.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

struct ProblemInstance {
    std::string name;
    OraclePtr f;
    OraclePtr g;  ///< composite parts; h is null for single-function problems
    OraclePtr h;
    Vector x0;
    std::optional<double> f_star;  ///< known in closed form
};

ProblemInstance make_problem(const RunConfig& cfg);

struct RunSummary {
    bool ok = false;
    std::string error;
    int iterations = 0;
    double final_f = 0.0;
    double final_grad_norm = 0.0;
    std::optional<double> f_star;
    std::string f_star_source;
    std::optional<double> slope;
    double sigma_max = 0.0;
    bool window_ok = true;
    double r_hat = 0.0;  ///< |x0 - y_K|, a proxy for the initial distance
    std::uint64_t n_grad = 0;
    std::uint64_t n_hess = 0;
    std::optional<SlidingCounts> components;
    Trace trace;
    Vector y;

    /// `key = value` lines, echoing the run parameters first.
    std::string render(const RunConfig& cfg) const;
};

/// Runs the configured method, streaming the trace to cfg.trace_path and the
/// summary to cfg.summary_path when set. Solver errors are caught, recorded in
/// the summary and as a footer in the trace; config errors propagate.
RunSummary run(const RunConfig& cfg);

}  // namespace hyperfast
