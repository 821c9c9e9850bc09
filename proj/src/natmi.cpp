#include "hyperfast/natmi.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "hyperfast/taylor_model.hpp"

namespace hyperfast {

ParamReport validate_params(const NatmiConfig& cfg) {
    ParamReport rep;
    const double p = cfg.order;
    const double g = cfg.gamma;
    const double xi = cfg.xi;
    if (cfg.order == 3 && xi > 0.0 && g < 1.0) {
        rep.sigma = (p * xi + 1.0 - xi + 2.0 * g * xi) / ((1.0 - g) * 2.0 * p * xi);
    }
    std::ostringstream why;
    if (cfg.order != 3) {
        why << "order p = " << cfg.order << " is unsupported (only p = 3)";
    } else if (!(g >= 0.0 && g < 1.0)) {
        why << "gamma = " << g << " outside [0, 1)";
    } else if (!(xi >= 1.0)) {
        why << "H = xi L3 >= L3 fails: xi = " << xi << " < 1";
    } else if (2.0 * g + 1.0 / (xi * (p + 1.0)) > 1.0) {
        why << "1 >= 2 gamma + 1/(xi (p+1)) fails: 2 gamma + 1/(xi (p+1)) = " << 2.0 * g + 1.0 / (xi * (p + 1.0));
    }
    rep.violation = why.str();
    rep.ok = rep.violation.empty();
    return rep;
}

double window_value(double lambda, double r, double l3, double xi) {
    return lambda * xi * l3 * r * r / 2.0;
}

bool lambda_window(double lambda, double r, double l3, double xi) {
    const double w = window_value(lambda, r, l3, xi);
    return w >= 0.5 && w <= 0.75;
}

double step_weight(double lambda, double A) {
    return (lambda + std::sqrt(lambda * lambda + 4.0 * lambda * A)) / 2.0;
}

SolverState SolverState::start(const VectorRef& x0) {
    SolverState s;
    s.x = x0;
    s.y = x0;
    return s;
}

LambdaSearchResult lambda_search(const NatmiConfig& cfg, const AcceleratedProblem& problem, const SolverState& state) {
    const double l3 = problem.window_l3;
    LambdaSearchResult best;

    auto trial = [&](double lambda) {
        LambdaSearchResult t;
        t.lambda = lambda;
        t.a = step_weight(lambda, state.A);
        t.A_next = state.A + t.a;
        t.x_tilde = (state.A / t.A_next) * state.y + (t.a / t.A_next) * state.x;
        t.sub = problem.solve(t.x_tilde);
        return t;
    };
    auto radius = [](const LambdaSearchResult& t) { return (t.sub.y - t.x_tilde).norm(); };
    int inner_total = 0;
    int trials = 0;
    auto finish = [&](LambdaSearchResult t) {
        t.inner_iters = inner_total;
        t.trials = trials;
        return t;
    };

    // With A = 0 the anchor is x_0 whatever lambda is: one solve, then aim at
    // the middle of the window (5/8).
    if (state.A == 0.0) {
        LambdaSearchResult t = trial(1.0);
        ++trials;
        inner_total += t.sub.inner_iters;
        if (t.sub.done()) return finish(std::move(t));
        const double r = radius(t);
        const double lambda = 0.625 * 2.0 / (cfg.xi * l3 * r * r);
        t.lambda = lambda;
        t.a = step_weight(lambda, 0.0);
        t.A_next = t.a;
        return finish(std::move(t));
    }

    double lambda = state.lambda_prev > 0.0 ? state.lambda_prev : 1.0;
    double lo = 0.0;  // largest lambda seen with window value < 1/2
    double hi = 0.0;  // smallest lambda seen with window value > 3/4
    double last_w = 0.0;
    while (trials < cfg.max_lambda_trials) {
        LambdaSearchResult t = trial(lambda);
        ++trials;
        inner_total += t.sub.inner_iters;
        if (t.sub.done()) return finish(std::move(t));
        const double w = window_value(lambda, radius(t), l3, cfg.xi);
        last_w = w;
        if (w >= 0.5 && w <= 0.75) return finish(std::move(t));
        if (w < 0.5) {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if (lo > 0.0 && hi > 0.0) {
            lambda = std::sqrt(lo * hi);
        } else {
            // No bracket yet: rescale toward the window midpoint as if r did not
            // depend on lambda, limited to a factor lambda_growth either way.
            const double factor = w > 0.0 ? 0.625 / w : cfg.lambda_growth;
            lambda *= std::clamp(factor, 1.0 / cfg.lambda_growth, cfg.lambda_growth);
        }
    }
    std::ostringstream msg;
    msg << "lambda_search: no lambda in the acceptance window after " << trials << " trials (last window value "
        << last_w << ", bracket [" << lo << ", " << hi << "]); check L3";
    throw SolverError(msg.str());
}

std::optional<StepInfo> outer_step(const NatmiConfig& cfg, const AcceleratedProblem& problem, SolverState& state) {
    LambdaSearchResult ls = lambda_search(cfg, problem, state);
    if (ls.sub.done()) {
        if (ls.sub.stationary) {
            state.y = ls.x_tilde;
        } else if (problem.value && problem.value(ls.sub.y) < problem.value(state.y)) {
            state.y = ls.sub.y;
        }
        state.converged = true;
        return std::nullopt;
    }
    StepInfo info;
    info.x_tilde = ls.x_tilde;
    info.y = ls.sub.y;
    info.grad_y = ls.sub.grad_y;
    info.lambda = ls.lambda;
    info.a = ls.a;
    info.A = ls.A_next;
    info.radius = (info.y - info.x_tilde).norm();
    info.sigma = info.radius > 0.0
                     ? (info.y - (info.x_tilde - info.lambda * info.grad_y)).norm() / info.radius
                     : 0.0;
    info.inner_iters = ls.inner_iters;
    info.trials = ls.trials;

    state.x -= info.a * info.grad_y;
    state.A = info.A;
    state.y = info.y;
    state.k += 1;
    state.lambda_prev = info.lambda;
    state.sigma_observed = info.sigma;
    return info;
}

NatmiResult run_accelerated(const NatmiConfig& cfg, const AcceleratedProblem& problem, const VectorRef& x0,
                            const TraceCallback& on_row) {
    const ParamReport rep = validate_params(cfg);
    if (!rep.ok) throw ConfigError("natmi: " + rep.violation);
    if (!(problem.window_l3 > 0.0)) throw ConfigError("natmi: L3 must be positive");
    if (!x0.allFinite()) throw ConfigError("natmi: non-finite starting point");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    NatmiResult res;
    res.state = SolverState::start(x0);
    while (res.state.k < cfg.max_iters) {
        auto step = outer_step(cfg, problem, res.state);
        if (!step) break;

        TraceRecord rec;
        rec.k = res.state.k;
        rec.f = problem.value(step->y);
        rec.grad_norm = step->grad_y.norm();
        rec.step_radius = step->radius;
        rec.lambda = step->lambda;
        rec.A = step->A;
        rec.inner_iters = step->inner_iters;
        if (problem.counters) problem.counters(rec);
        if (cfg.record_time) rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        res.trace.push_back(rec);
        res.steps.push_back(std::move(*step));
        if (on_row) on_row(rec);
        if (problem.stop_after && problem.stop_after(res.steps.back())) break;

        if (rec.grad_norm <= cfg.grad_tol) {
            res.state.converged = true;
            break;
        }
    }
    res.y = res.state.y;
    return res;
}

std::function<SubproblemResult(const Vector&)> make_subsolver(const NatmiConfig& cfg, OraclePtr oracle) {
    if (cfg.subsolver == Subsolver::exact) {
        return [cfg, oracle](const Vector& x_tilde) {
            SubproblemResult r;
            const ModelSpec spec =
                make_model(oracle, x_tilde, cfg.xi * oracle->lipschitz3(), cfg.order, ThirdDerivative::exact);
            if (spec.grad_anchor.isZero(0.0)) {
                r.y = x_tilde;
                r.grad_y = spec.grad_anchor;
                r.stationary = true;
                return r;
            }
            if (spec.grad_anchor.norm() <= cfg.eps) {
                r.y = x_tilde;
                r.grad_y = spec.grad_anchor;
                r.floor_reached = true;
                return r;
            }
            r.y = exact_model_min(spec);
            r.grad_y = oracle->gradient(r.y);
            // The minimizer is only resolved to roundoff; once |grad f(y)| is at
            // that level the relative accuracy cannot be certified.
            r.floor_reached = r.y == x_tilde || model_grad(spec, r.y).norm() > cfg.gamma * r.grad_y.norm();
            return r;
        };
    }
    return [cfg, oracle](const Vector& x_tilde) {
        BdgmOptions opts = cfg.bdgm;
        opts.gamma = cfg.gamma;
        BdgmState st = bdgm_setup(oracle, x_tilde, cfg.eps, opts);
        const BdgmResult br = bdgm_solve(st);
        SubproblemResult r;
        r.y = br.z;
        r.grad_y = br.grad_at_z;
        r.inner_iters = br.inner_iters;
        r.stationary = st.solved_at_anchor();
        r.floor_reached = br.floor_reached;
        return r;
    };
}

NatmiResult natmi_solve(const NatmiConfig& cfg, OraclePtr oracle, const VectorRef& x0, const TraceCallback& on_row) {
    if (!oracle) throw ConfigError("natmi: null oracle");
    require_same_dim(x0.size(), oracle->dim(), "natmi");
    if (cfg.subsolver == Subsolver::bdgm && std::abs(cfg.xi - 1.5) > 1e-15) {
        throw ConfigError("natmi: the BDGM subsolver fixes xi = 3/2 (H = 3 L3 / 2)");
    }
    auto counter = counted(std::move(oracle));
    AcceleratedProblem problem;
    problem.window_l3 = counter->lipschitz3();
    problem.solve = make_subsolver(cfg, counter);
    problem.value = [inner = counter->inner()](const Vector& y) { return inner->value(y); };
    problem.counters = [counter](TraceRecord& rec) {
        rec.n_grad = counter->n_grad();
        rec.n_hess = counter->n_hess();
        rec.max_grad_norm = counter->max_grad_norm();
        rec.max_hess_norm = counter->max_hess_norm();
    };
    return run_accelerated(cfg, problem, x0, on_row);
}

}  // namespace hyperfast
