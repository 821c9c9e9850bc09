#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hyperfast/bdgm.hpp"
#include "hyperfast/oracle.hpp"
#include "hyperfast/trace.hpp"

namespace hyperfast {

/// How each regularized Taylor subproblem is solved.
enum class Subsolver {
    bdgm,   ///< gradients and Hessians only (the hyperfast method)
    exact,  ///< damped Newton on the model with exact third derivatives
};

struct NatmiConfig {
    double gamma = 1.0 / 6.0;  ///< subproblem accuracy
    double xi = 1.5;           ///< regularization scale, H = xi * L3
    int order = 3;
    double eps = 1e-10;        ///< target accuracy, drives the inner tolerance
    int max_iters = 30;        ///< outer iteration cap K
    double grad_tol = 0.0;     ///< stop once |grad f(y_k)| <= grad_tol
    double lambda_growth = 16.0;  ///< cap on the per-trial change of lambda before a bracket exists
    int max_lambda_trials = 100;
    Subsolver subsolver = Subsolver::bdgm;
    BdgmOptions bdgm;
    bool record_time = false;  ///< fill TraceRecord::wall_ms (breaks byte-identical traces)
};

/// Outcome of the parameter check: contraction factor sigma and the first violated condition.
struct ParamReport {
    bool ok = false;
    double sigma = 0.0;  ///< (p xi + 1 - xi + 2 gamma xi) / ((1 - gamma) 2 p xi)
    std::string violation;
};

ParamReport validate_params(const NatmiConfig& cfg);

/// lambda * xi * L3 * r^2 / 2, the quantity the acceptance window bounds.
double window_value(double lambda, double r, double l3, double xi = 1.5);

/// True iff 1/2 <= lambda * xi * L3 * r^2 / 2 <= 3/4 (xi = 3/2 gives lambda 3 L3 r^2 / 4).
bool lambda_window(double lambda, double r, double l3, double xi = 1.5);

/// a solving a^2 = lambda (A + a), the positive root.
double step_weight(double lambda, double A);

/// Accelerated-method state; A = 0 and x = y = x0 initially.
struct SolverState {
    double A = 0.0;
    Vector x;
    Vector y;
    int k = 0;
    double lambda_prev = 0.0;
    double sigma_observed = 0.0;
    bool converged = false;

    static SolverState start(const VectorRef& x0);
};

/// Per-iteration record of what was accepted, for verification.
struct StepInfo {
    Vector x_tilde;
    Vector y;
    Vector grad_y;
    double lambda = 0.0;
    double a = 0.0;
    double A = 0.0;
    double radius = 0.0;
    double sigma = 0.0;
    int inner_iters = 0;
    int trials = 0;
};

struct SubproblemResult {
    Vector y;
    Vector grad_y;  ///< gradient of the full objective at y
    int inner_iters = 0;
    bool stationary = false;     ///< the anchor itself had zero gradient
    bool floor_reached = false;  ///< the subproblem accuracy exceeds what the anchor needs
    bool done() const { return stationary || floor_reached; }
};

/// The pieces of the accelerated loop that differ between the plain and the
/// composite method: how subproblems are solved and which L3 sets the window.
struct AcceleratedProblem {
    double window_l3 = 0.0;
    std::function<SubproblemResult(const Vector& x_tilde)> solve;
    std::function<double(const Vector&)> value;
    /// Fills the counter columns of a trace row.
    std::function<void(TraceRecord&)> counters;
    /// Optional early exit, checked after every accepted step.
    std::function<bool(const StepInfo&)> stop_after;
};

struct LambdaSearchResult {
    double lambda = 0.0;
    double a = 0.0;
    double A_next = 0.0;
    Vector x_tilde;
    SubproblemResult sub;
    int inner_iters = 0;  ///< summed over all trials
    int trials = 0;
};

LambdaSearchResult lambda_search(const NatmiConfig& cfg, const AcceleratedProblem& problem, const SolverState& state);

/// One outer iteration: lambda search, then x <- x - a grad f(y). Returns the
/// accepted step, or nothing when the anchor turned out to be stationary (y
/// becomes the anchor) or already eps-accurate (y is kept).
std::optional<StepInfo> outer_step(const NatmiConfig& cfg, const AcceleratedProblem& problem, SolverState& state);

struct NatmiResult {
    Vector y;
    Trace trace;
    std::vector<StepInfo> steps;
    SolverState state;
};

using TraceCallback = std::function<void(const TraceRecord&)>;

/// Runs the accelerated loop on a prepared problem.
NatmiResult run_accelerated(const NatmiConfig& cfg, const AcceleratedProblem& problem, const VectorRef& x0,
                            const TraceCallback& on_row = {});

/// Subproblem solver for the plain method on `oracle` with H = xi * L3.
std::function<SubproblemResult(const Vector&)> make_subsolver(const NatmiConfig& cfg, OraclePtr oracle);

/// The full method on one oracle. Counters in the trace come from a private
/// CountedOracle wrapping `oracle`.
NatmiResult natmi_solve(const NatmiConfig& cfg, OraclePtr oracle, const VectorRef& x0,
                        const TraceCallback& on_row = {});

}  // namespace hyperfast
