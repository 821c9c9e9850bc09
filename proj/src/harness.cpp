#include "hyperfast/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "hyperfast/problems.hpp"
#include "hyperfast/random.hpp"

namespace hyperfast {

double fit_rate(const Trace& trace, int k_lo, int k_hi, double f_star) {
    if (k_lo < 1 || k_hi <= k_lo) throw ConfigError("fit_rate: need 1 <= k_lo < k_hi");
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f_star));
    std::vector<double> lx, ly;
    bool any_in_window = false;
    for (const TraceRecord& r : trace) {
        if (r.k < k_lo || r.k > k_hi) continue;
        any_in_window = true;
        const double gap = r.f - f_star;
        if (!(gap > floor)) continue;
        lx.push_back(std::log(static_cast<double>(r.k)));
        ly.push_back(std::log(gap));
    }
    if (lx.size() < 3) {
        std::ostringstream msg;
        msg << "fit_rate: " << lx.size() << " usable points in [" << k_lo << ", " << k_hi << "]"
            << (any_in_window ? " (gap below resolution or f_k <= f_star)" : "") << "; need 3";
        throw SolverError(msg.str());
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

Reference reference_solution(const Oracle& oracle, const VectorRef& x0, int budget, double grad_tol) {
    require_same_dim(x0.size(), oracle.dim(), "reference_solution");
    Reference ref;
    ref.x = x0;
    ref.f = oracle.value(ref.x);
    Vector g = oracle.gradient(ref.x);
    const Eigen::Index n = x0.size();
    while (g.norm() > grad_tol) {
        if (ref.iters >= budget) {
            std::ostringstream msg;
            msg << "reference_fstar: budget of " << budget << " Newton steps exhausted at |grad f| = " << g.norm();
            throw SolverError(msg.str());
        }
        ++ref.iters;
        const Matrix h = oracle.hessian(ref.x);
        // Tiny shift keeps the solve defined where the Hessian is singular (x^4 at 0).
        const double shift = 1e-14 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
        const Vector d = -(h + shift * Matrix::Identity(n, n)).ldlt().solve(g);
        const double slope = g.dot(d);
        Vector trial = ref.x + d;
        double ft = oracle.value(trial);
        Vector gt = oracle.gradient(trial);
        // Near the optimum the Armijo test drowns in roundoff of f; a full step
        // that shrinks the gradient is accepted there instead.
        if (!(ft <= ref.f + 1e-4 * slope) && !(gt.norm() < g.norm() && ft - ref.f <= 1e-12 * (1.0 + std::abs(ref.f)))) {
            double t = 0.5;
            bool found = false;
            for (int ls = 0; ls < 60 && !found; ++ls, t *= 0.5) {
                trial = ref.x + t * d;
                ft = oracle.value(trial);
                found = ft <= ref.f + 1e-4 * t * slope;
            }
            if (!found) throw SolverError("reference_fstar: Newton stalled at |grad f| = " + format_double(g.norm()));
            gt = oracle.gradient(trial);
        }
        ref.x = trial;
        ref.f = ft;
        g = gt;
    }
    ref.grad_norm = g.norm();
    return ref;
}

double reference_fstar(const Oracle& oracle, const VectorRef& x0, int budget) {
    return reference_solution(oracle, x0, budget).f;
}

double power_iteration(const MatrixRef& m, int iters) {
    const Eigen::Index n = m.rows();
    if (n == 0) return 0.0;
    Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int i = 0; i < iters; ++i) {
        Vector w = m * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        lambda = v.dot(w);
        v = w / nw;
    }
    return std::max(lambda, (m * v).norm());
}

Trace baseline_gd(OraclePtr oracle, const VectorRef& x0, int steps, const TraceCallback& on_row) {
    if (!oracle) throw ConfigError("baseline_gd: null oracle");
    require_same_dim(x0.size(), oracle->dim(), "baseline_gd");
    if (steps < 0) throw ConfigError("baseline_gd: negative step count");
    auto counter = counted(std::move(oracle));
    const Oracle& f = *counter->inner();

    Vector x = x0;
    double fx = f.value(x);
    const double f0 = fx;
    Vector g = counter->gradient(x);
    double l1 = power_iteration(counter->hessian(x));
    if (!(l1 > 0.0)) l1 = 1.0;

    Trace trace;
    for (int k = 1; k <= steps; ++k) {
        Vector next = x;
        double f_next = fx;
        const double gg = g.squaredNorm();
        if (gg > 0.0) {
            int tries = 0;
            for (;;) {
                next = x - g / l1;
                f_next = f.value(next);
                // Slack for value roundoff once the decrease itself is at that level.
                const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fx));
                if (f_next <= fx - gg / (2.0 * l1) + slack) break;
                if (!std::isfinite(f_next) && ++tries > 200) throw SolverError("baseline_gd: non-finite objective");
                if (++tries > 200) throw SolverError("baseline_gd: no sufficient decrease after 200 step halvings");
                l1 = std::max(2.0 * l1, power_iteration(counter->hessian(x)));
            }
        }
        if (!std::isfinite(f_next) || f_next > f0 + 10.0 * std::max(1.0, std::abs(f0))) {
            throw SolverError("baseline_gd: diverged (f = " + format_double(f_next) + ")");
        }
        TraceRecord rec;
        rec.k = k;
        rec.step_radius = (next - x).norm();
        rec.lambda = 1.0 / l1;
        x = next;
        fx = f_next;
        g = counter->gradient(x);
        rec.f = fx;
        rec.grad_norm = g.norm();
        rec.n_grad = counter->n_grad();
        rec.n_hess = counter->n_hess();
        rec.max_grad_norm = counter->max_grad_norm();
        rec.max_hess_norm = counter->max_hess_norm();
        trace.push_back(rec);
        if (on_row) on_row(rec);
    }
    return trace;
}

Method parse_method(const std::string& name) {
    if (name == "hyperfast") return Method::hyperfast;
    if (name == "natmi-exact" || name == "natmi_exact") return Method::natmi_exact;
    if (name == "sliding") return Method::sliding;
    if (name == "gd" || name == "gd_baseline") return Method::gd;
    throw ConfigError("unknown method '" + name + "' (hyperfast, natmi-exact, sliding, gd)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::hyperfast: return "hyperfast";
        case Method::natmi_exact: return "natmi-exact";
        case Method::sliding: return "sliding";
        case Method::gd: return "gd";
    }
    return "?";
}

namespace {

const std::set<std::string> problem_names = {"quartic1d", "quartic", "quadratic", "worst_case", "logreg",
                                             "sliding_benchmark"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError("config: '" + key + "' expects a finite number, got '" + v + "'");
    }
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "problem") {
        if (!problem_names.count(value)) throw ConfigError("config: unknown problem '" + value + "'");
        cfg.problem = value;
    } else if (key == "method") {
        cfg.method = parse_method(value);
    } else if (key == "eps") {
        cfg.eps = to_double(key, value);
    } else if (key == "max_iters") {
        cfg.max_iters = static_cast<int>(to_int(key, value));
    } else if (key == "grad_tol") {
        cfg.grad_tol = to_double(key, value);
    } else if (key == "gamma") {
        cfg.gamma = to_double(key, value);
    } else if (key == "xi") {
        cfg.xi = to_double(key, value);
    } else if (key == "c_delta") {
        cfg.c_delta = to_double(key, value);
    } else if (key == "inner_max_iters") {
        cfg.inner_max_iters = static_cast<int>(to_int(key, value));
    } else if (key == "seed") {
        const long long s = to_int(key, value);
        if (s < 0) throw ConfigError("config: seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "n") {
        cfg.n = to_int(key, value);
    } else if (key == "m") {
        cfg.m = to_int(key, value);
    } else if (key == "ridge") {
        cfg.ridge = to_double(key, value);
    } else if (key == "a4") {
        cfg.a4 = to_double(key, value);
    } else if (key == "ratio") {
        cfg.ratio = to_double(key, value);
    } else if (key == "data") {
        cfg.data = value;
    } else if (key == "f_star") {
        cfg.f_star = to_double(key, value);
    } else if (key == "fit_lo") {
        cfg.fit_lo = static_cast<int>(to_int(key, value));
    } else if (key == "trace") {
        cfg.trace_path = value;
    } else if (key == "summary") {
        cfg.summary_path = value;
    } else if (key == "timing") {
        cfg.timing = to_bool(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        }
        if (!seen.insert(key).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        try {
            set_config_key(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void RunConfig::validate() const {
    if (!problem_names.count(problem)) throw ConfigError("config: unknown problem '" + problem + "'");
    if (!(eps > 0.0)) throw ConfigError("config: eps must be positive");
    if (max_iters < 1) throw ConfigError("config: max_iters must be >= 1");
    if (inner_max_iters < 1) throw ConfigError("config: inner_max_iters must be >= 1");
    if (grad_tol < 0.0) throw ConfigError("config: grad_tol must be nonnegative");
    if (n < 0 || m < 1) throw ConfigError("config: n and m must be positive");
    if (ridge < 0.0 || a4 < 0.0) throw ConfigError("config: ridge and a4 must be nonnegative");
    if (!(ratio > 0.0)) throw ConfigError("config: ratio must be positive");
    if (fit_lo < 1) throw ConfigError("config: fit_lo must be >= 1");
    if (!data.empty() && problem != "logreg") throw ConfigError("config: 'data' only applies to logreg");
    if (method == Method::gd && (gamma || xi || c_delta)) {
        throw ConfigError("config: gamma, xi, c_delta do not apply to gd");
    }
    if ((method == Method::hyperfast || method == Method::sliding) && xi && *xi != 1.5) {
        throw ConfigError("config: the gradient-based inner solver fixes xi = 1.5");
    }
    if (method == Method::natmi_exact && c_delta) throw ConfigError("config: c_delta does not apply to natmi-exact");
    if (method != Method::gd) {
        NatmiConfig nc;
        if (gamma) nc.gamma = *gamma;
        if (xi) nc.xi = *xi;
        const ParamReport rep = validate_params(nc);
        if (!rep.ok) throw ConfigError("config: " + rep.violation);
    }
}

ProblemInstance make_problem(const RunConfig& cfg) {
    ProblemInstance p;
    p.name = cfg.problem;
    Rng rng(cfg.seed);
    if (cfg.problem == "quartic1d") {
        // x^4 / 4
        p.f = make_quartic(Matrix::Zero(1, 1), Vector::Zero(1), 1.0);
        p.x0 = Vector::Ones(1);
        p.f_star = 0.0;
    } else if (cfg.problem == "quartic") {
        const Eigen::Index n = cfg.n > 0 ? cfg.n : 10;
        Matrix b(n, n);
        for (Eigen::Index j = 0; j < n; ++j) b.col(j) = rng.normal_vector(n);
        Matrix q = b.transpose() * b / static_cast<double>(n);
        q = 0.5 * (q + q.transpose());
        p.f = make_quartic(q, rng.normal_vector(n), cfg.a4);
        p.x0 = Vector::Zero(n);
    } else if (cfg.problem == "quadratic") {
        const Eigen::Index n = cfg.n > 0 ? cfg.n : 3;
        p.f = make_quartic(2.0 * Matrix::Identity(n, n), Vector::Zero(n), 0.0, 1.0);
        p.x0 = Vector::Unit(n, 0);
        p.f_star = 0.0;
    } else if (cfg.problem == "worst_case") {
        const Eigen::Index n = cfg.n > 0 ? cfg.n : 10;
        p.f = make_worst_case(3, n);
        p.x0 = Vector::Ones(n);
        p.f_star = 0.0;
    } else if (cfg.problem == "logreg") {
        Dataset d = cfg.data.empty() ? synth_logreg(cfg.seed, cfg.m, cfg.n > 0 ? cfg.n : 20) : load_libsvm(cfg.data);
        const Eigen::Index n = d.features.cols();
        p.f = make_logreg(std::move(d), cfg.ridge);
        p.x0 = Vector::Zero(n);
    } else if (cfg.problem == "sliding_benchmark") {
        const Eigen::Index n = cfg.n > 0 ? cfg.n : 10;
        auto lr = make_logreg(synth_logreg(cfg.seed, cfg.m, n), cfg.ridge);
        p.h = std::make_shared<SumOracle>(lr, make_quartic(Matrix::Zero(n, n), Vector::Zero(n), 0.1));
        Rng grng(cfg.seed + 1);
        const Vector c = 0.1 * grng.normal_vector(n);
        p.g = make_quartic(0.1 * Matrix::Identity(n, n), c, cfg.ratio * p.h->lipschitz3() / 6.0);
        p.f = std::make_shared<SumOracle>(p.g, p.h);
        p.x0 = Vector::Zero(n);
    } else {
        throw ConfigError("unknown problem '" + cfg.problem + "'");
    }
    return p;
}

std::string RunSummary::render(const RunConfig& cfg) const {
    std::ostringstream out;
    auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
    kv("problem", cfg.problem);
    kv("method", method_name(cfg.method));
    kv("eps", format_double(cfg.eps));
    kv("max_iters", std::to_string(cfg.max_iters));
    kv("seed", std::to_string(cfg.seed));
    kv("status", ok ? "ok" : "error");
    if (!ok) kv("error", error);
    kv("iterations", std::to_string(iterations));
    kv("final_f", format_double(final_f));
    kv("final_grad_norm", format_double(final_grad_norm));
    if (f_star) {
        kv("f_star", format_double(*f_star));
        kv("f_star_source", f_star_source);
        kv("final_gap", format_double(final_f - *f_star));
    }
    kv("slope", slope ? format_double(*slope) : "n/a");
    kv("sigma_max", format_double(sigma_max));
    kv("lambda_window_ok", window_ok ? "true" : "false");
    kv("r_hat", format_double(r_hat));
    kv("n_grad", std::to_string(n_grad));
    kv("n_hess", std::to_string(n_hess));
    if (components) {
        kv("hess_g", std::to_string(components->hess_g));
        kv("hess_h", std::to_string(components->hess_h));
        kv("grad_g", std::to_string(components->grad_g));
        kv("grad_h", std::to_string(components->grad_h));
    }
    return out.str();
}

RunSummary run(const RunConfig& cfg) {
    cfg.validate();
    const ProblemInstance prob = make_problem(cfg);
    const bool components = cfg.method == Method::sliding;

    std::ofstream trace_file;
    std::optional<TraceWriter> writer;
    if (!cfg.trace_path.empty()) {
        trace_file.open(cfg.trace_path);
        if (!trace_file) throw ConfigError("cannot open trace file " + cfg.trace_path);
        writer.emplace(trace_file, components);
        writer->header("problem", cfg.problem);
        writer->header("method", method_name(cfg.method));
        writer->header("eps", format_double(cfg.eps));
        writer->header("max_iters", std::to_string(cfg.max_iters));
        writer->header("seed", std::to_string(cfg.seed));
        writer->header("dim", std::to_string(prob.x0.size()));
        writer->header("L3", format_double(prob.f->lipschitz3()));
        writer->columns();
    }

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    RunSummary sum;
    auto on_row = [&](const TraceRecord& rec) {
        TraceRecord r = rec;
        r.wall_ms = cfg.timing ? std::chrono::duration<double, std::milli>(clock::now() - t0).count() : 0.0;
        sum.trace.push_back(r);
        if (writer) writer->row(r);
    };

    NatmiConfig nc;
    nc.eps = cfg.eps;
    nc.max_iters = cfg.max_iters;
    nc.grad_tol = cfg.grad_tol;
    if (cfg.gamma) nc.gamma = *cfg.gamma;
    if (cfg.xi) nc.xi = *cfg.xi;
    if (cfg.c_delta) nc.bdgm.c_delta = *cfg.c_delta;
    nc.bdgm.max_iters = cfg.inner_max_iters;

    std::vector<StepInfo> steps;
    double window_l3 = prob.f->lipschitz3();
    try {
        switch (cfg.method) {
            case Method::hyperfast:
            case Method::natmi_exact: {
                nc.subsolver = cfg.method == Method::natmi_exact ? Subsolver::exact : Subsolver::bdgm;
                NatmiResult r = natmi_solve(nc, prob.f, prob.x0, on_row);
                sum.y = r.y;
                steps = std::move(r.steps);
                break;
            }
            case Method::sliding: {
                SlidingConfig sc;
                sc.outer = nc;
                sc.middle.eps = nc.eps;
                sc.middle.gamma = nc.gamma;
                sc.middle.bdgm = nc.bdgm;
                OraclePtr g = prob.g ? prob.g : prob.f;
                OraclePtr h = prob.h ? prob.h : std::make_shared<ZeroOracle>(prob.x0.size());
                const CompositeProblem cp(g, h);
                window_l3 = cp.g->lipschitz3();
                SlidingResult r = solve_sliding(cp, prob.x0, sc, on_row);
                sum.y = r.y;
                steps = std::move(r.steps);
                sum.components = r.counts;
                break;
            }
            case Method::gd: {
                baseline_gd(prob.f, prob.x0, cfg.max_iters, on_row);
                break;
            }
        }
        sum.ok = true;
    } catch (const SolverError& e) {
        sum.ok = false;
        sum.error = e.what();
        if (writer) writer->error_footer(sum.error);
    }

    sum.iterations = sum.trace.empty() ? 0 : sum.trace.back().k;
    if (!sum.trace.empty()) {
        sum.final_f = sum.trace.back().f;
        sum.final_grad_norm = sum.trace.back().grad_norm;
        sum.n_grad = sum.trace.back().n_grad;
        sum.n_hess = sum.trace.back().n_hess;
    } else {
        sum.final_f = prob.f->value(prob.x0);
        sum.final_grad_norm = prob.f->gradient(prob.x0).norm();
    }
    if (sum.y.size() > 0) {
        sum.final_f = prob.f->value(sum.y);
        sum.final_grad_norm = prob.f->gradient(sum.y).norm();
        sum.r_hat = (prob.x0 - sum.y).norm();
    }
    const double xi = nc.xi;
    for (const StepInfo& s : steps) {
        sum.sigma_max = std::max(sum.sigma_max, s.sigma);
        if (!lambda_window(s.lambda, s.radius, window_l3, xi)) sum.window_ok = false;
    }

    if (prob.f_star) {
        sum.f_star = prob.f_star;
        sum.f_star_source = "closed_form";
    } else if (cfg.f_star) {
        sum.f_star = cfg.f_star;
        sum.f_star_source = "config";
    } else {
        try {
            sum.f_star = reference_fstar(*prob.f, prob.x0);
            sum.f_star_source = "reference_newton";
        } catch (const SolverError&) {
        }
    }
    if (sum.f_star && sum.iterations > cfg.fit_lo) {
        try {
            sum.slope = fit_rate(sum.trace, cfg.fit_lo, sum.iterations, *sum.f_star);
        } catch (const Error&) {
        }
    }

    if (!cfg.summary_path.empty()) {
        std::ofstream out(cfg.summary_path);
        if (!out) throw ConfigError("cannot open summary file " + cfg.summary_path);
        out << sum.render(cfg);
    }
    return sum;
}

}  // namespace hyperfast
