#include "hyperfast/sliding.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include "hyperfast/problems.hpp"

namespace hyperfast {

namespace {

// Second differences of grad g around x give D^3 g(x)[e_i, e_j] exactly for
// polynomials up to degree four.
std::vector<Matrix> fd_tensor(const Oracle& g, const Vector& x, const Vector& gx) {
    const Eigen::Index n = x.size();
    const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.25) * std::max(1.0, x.norm());
    std::vector<Matrix> t(n, Matrix::Zero(n, n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            Vector col;
            if (i == j) {
                Vector e = Vector::Zero(n);
                e(i) = h;
                col = (g.gradient(x + e) + g.gradient(x - e) - 2.0 * gx) / (h * h);
            } else {
                Vector u = Vector::Zero(n), v = Vector::Zero(n);
                u(i) = h;
                u(j) = h;
                v(i) = h;
                v(j) = -h;
                col = (g.gradient(x + u) - g.gradient(x + v) - g.gradient(x - v) + g.gradient(x - u)) / (4.0 * h * h);
            }
            // col_k = D^3 g[e_i, e_j, e_k]
            for (Eigen::Index k = 0; k < n; ++k) {
                t[i](j, k) = col(k);
                t[j](i, k) = col(k);
            }
        }
    }
    // Average over all index permutations to remove the asymmetry left by roundoff.
    std::vector<Matrix> sym(n, Matrix::Zero(n, n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                sym[i](j, k) = (t[i](j, k) + t[i](k, j) + t[j](i, k) + t[j](k, i) + t[k](i, j) + t[k](j, i)) / 6.0;
    return sym;
}

}  // namespace

TaylorModelOracle::TaylorModelOracle(OraclePtr g, const VectorRef& anchor, double reg)
    : anchor_(anchor), reg_(reg), g_name_(g ? g->name() : "") {
    if (!g) throw ConfigError("TaylorModelOracle: null oracle");
    require_same_dim(anchor.size(), g->dim(), "TaylorModelOracle");
    if (!(reg >= 0.0)) throw ConfigError("TaylorModelOracle: regularization must be nonnegative");
    f0_ = g->value(anchor_);
    g0_ = g->gradient(anchor_);
    h0_ = g->hessian(anchor_);
    tensor_ = fd_tensor(*g, anchor_, g0_);
}

Vector TaylorModelOracle::cubic_action(const Vector& s) const {
    Vector out(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) out(i) = s.dot(tensor_[i] * s);
    return out;
}

Matrix TaylorModelOracle::cubic_matrix(const Vector& s) const {
    Matrix out = Matrix::Zero(s.size(), s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) out += s(i) * tensor_[i];
    return out;
}

double TaylorModelOracle::value(const VectorRef& y) const {
    const Vector s = y - anchor_;
    const double s2 = s.squaredNorm();
    return f0_ + g0_.dot(s) + 0.5 * s.dot(h0_ * s) + s.dot(cubic_action(s)) / 6.0 + reg_ / 6.0 * s2 * s2;
}

Vector TaylorModelOracle::gradient(const VectorRef& y) const {
    const Vector s = y - anchor_;
    return g0_ + h0_ * s + 0.5 * cubic_action(s) + (2.0 * reg_ / 3.0) * s.squaredNorm() * s;
}

Matrix TaylorModelOracle::hessian(const VectorRef& y) const {
    const Vector s = y - anchor_;
    const Eigen::Index n = s.size();
    return h0_ + cubic_matrix(s) +
           (2.0 * reg_ / 3.0) * (s.squaredNorm() * Matrix::Identity(n, n) + 2.0 * s * s.transpose());
}

Matrix TaylorModelOracle::third_matrix(const VectorRef& y, const VectorRef& u) const {
    const Vector s = y - anchor_;
    const Eigen::Index n = s.size();
    const Vector uu = u;
    const double a4 = 2.0 * reg_ / 3.0;
    return cubic_matrix(uu) +
           2.0 * a4 * (s.dot(uu) * Matrix::Identity(n, n) + s * uu.transpose() + uu * s.transpose());
}

CompositeProblem::CompositeProblem(OraclePtr g_part, OraclePtr h_part) {
    if (!g_part || !h_part) throw ConfigError("CompositeProblem: null component");
    require_same_dim(g_part->dim(), h_part->dim(), "CompositeProblem");
    if (!h_part->is_zero() && g_part->lipschitz3() > h_part->lipschitz3()) {
        std::cerr << "warning: L3(g) = " << g_part->lipschitz3() << " > L3(h) = " << h_part->lipschitz3()
                  << "; swapping g and h\n";
        std::swap(g_part, h_part);
        swapped = true;
    }
    g = counted(std::move(g_part));
    h = counted(std::move(h_part));
}

double CompositeProblem::value(const VectorRef& x) const {
    return g->inner()->value(x) + h->inner()->value(x);
}

Vector CompositeProblem::gradient(const VectorRef& x) const {
    return g->gradient(x) + h->gradient(x);
}

ComponentCounts CompositeProblem::counts() const {
    return {g->n_grad(), g->n_hess(), h->n_grad(), h->n_hess()};
}

Membership composite_membership(const CompositeProblem& prob, const ModelSpec& g_model, const VectorRef& point) {
    Membership m;
    const Vector hg = prob.h->gradient(point);
    m.lhs = (model_grad(g_model, point) + hg).norm();
    m.rhs = (prob.g->gradient(point) + hg).norm() / 6.0;
    m.member = m.lhs <= m.rhs + membership_tolerance(g_model);
    return m;
}

Membership composite_membership(const CompositeProblem& prob, const VectorRef& anchor, const VectorRef& point) {
    const ModelSpec spec = make_model(prob.g, anchor, 1.5 * prob.g->lipschitz3());
    return composite_membership(prob, spec, point);
}

namespace {

void check_config(const SlidingConfig& cfg) {
    for (const NatmiConfig* c : {&cfg.outer, &cfg.middle}) {
        if (c->subsolver != Subsolver::bdgm) throw ConfigError("sliding: only the BDGM inner solver is supported");
        if (std::abs(c->xi - 1.5) > 1e-15) throw ConfigError("sliding: xi is fixed at 3/2");
    }
}

AcceleratedProblem outer_problem(const CompositeProblem& prob, std::function<SubproblemResult(const Vector&)> solve) {
    AcceleratedProblem p;
    p.window_l3 = prob.g->lipschitz3();
    p.solve = std::move(solve);
    p.value = [&prob](const Vector& y) { return prob.value(y); };
    p.counters = [&prob](TraceRecord& rec) {
        const ComponentCounts c = prob.counts();
        rec.n_grad = c.grad_g + c.grad_h;
        rec.n_hess = c.hess_g + c.hess_h;
        rec.max_grad_norm = std::max(prob.g->max_grad_norm(), prob.h->max_grad_norm());
        rec.max_hess_norm = std::max(prob.g->max_hess_norm(), prob.h->max_hess_norm());
        rec.components = c;
    };
    return p;
}

SlidingResult finish(const CompositeProblem& prob, NatmiResult&& r, int middle_iters) {
    SlidingResult out;
    out.y = std::move(r.y);
    out.trace = std::move(r.trace);
    out.steps = std::move(r.steps);
    const ComponentCounts c = prob.counts();
    out.counts = {c.hess_g, c.hess_h, c.grad_g, c.grad_h};
    out.middle_iters = middle_iters;
    return out;
}

// Outer subproblem when h = 0: the inner method runs on g with h's gradient
// added to every residual, exactly as the plain method would on g alone.
std::function<SubproblemResult(const Vector&)> degenerate_subsolver(const CompositeProblem& prob,
                                                                    const SlidingConfig& cfg) {
    return [&prob, cfg](const Vector& x_tilde) {
        BdgmOptions opts = cfg.outer.bdgm;
        opts.gamma = cfg.outer.gamma;
        BdgmState st = bdgm_setup(prob.g, x_tilde, cfg.outer.eps, opts, prob.h);
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

}  // namespace

SlidingResult solve_composite_natmi(const CompositeProblem& prob, const VectorRef& x0, const SlidingConfig& cfg,
                                    const TraceCallback& on_row) {
    check_config(cfg);
    require_same_dim(x0.size(), prob.dim(), "solve_composite_natmi");
    if (prob.h->is_zero()) {
        NatmiResult r = run_accelerated(cfg.outer, outer_problem(prob, degenerate_subsolver(prob, cfg)), x0, on_row);
        return finish(prob, std::move(r), 0);
    }
    return solve_sliding(prob, x0, cfg, on_row);
}

SlidingResult solve_sliding(const CompositeProblem& prob, const VectorRef& x0, const SlidingConfig& cfg,
                            const TraceCallback& on_row) {
    check_config(cfg);
    require_same_dim(x0.size(), prob.dim(), "solve_sliding");
    if (prob.h->is_zero()) return solve_composite_natmi(prob, x0, cfg, on_row);
    if (!(prob.g->lipschitz3() > 0.0)) throw ConfigError("sliding: L3(g) must be positive");

    const double reg_g = cfg.outer.xi * prob.g->lipschitz3();
    int middle_total = 0;

    auto middle = [&](const Vector& x_tilde) {
        SubproblemResult out;
        const Vector full_grad = prob.gradient(x_tilde);
        if (full_grad.isZero(0.0)) {
            out.y = x_tilde;
            out.grad_y = full_grad;
            out.stationary = true;
            return out;
        }
        // min_y m_g(y) + h(y), with m_g the regularized model of g at x_tilde.
        auto model = std::make_shared<TaylorModelOracle>(prob.g, x_tilde, reg_g);
        auto f_mid = std::make_shared<SumOracle>(model, prob.h);
        const double tol = 1e-12 * (1.0 + full_grad.norm());

        Vector accepted_grad;
        auto member = [&](const Vector& y, const Vector& mid_grad) {
            const Vector gy = prob.gradient(y);
            if (mid_grad.norm() <= gy.norm() / 6.0 + tol) {
                accepted_grad = gy;
                return true;
            }
            return false;
        };

        AcceleratedProblem mp;
        mp.window_l3 = f_mid->lipschitz3();
        mp.solve = make_subsolver(cfg.middle, f_mid);
        mp.value = [f_mid](const Vector& y) { return f_mid->value(y); };
        mp.stop_after = [&](const StepInfo& s) { return member(s.y, s.grad_y); };
        const NatmiResult r = run_accelerated(cfg.middle, mp, x_tilde);
        middle_total += r.state.k;
        out.inner_iters = r.state.k;
        out.y = r.y;
        if (accepted_grad.size() > 0 && !r.steps.empty() && r.steps.back().y == r.y) {
            out.grad_y = accepted_grad;
            return out;
        }
        if (r.state.converged) {
            // The middle problem is solved to eps; accept whatever relative
            // accuracy that gives and report it as the accuracy floor.
            out.grad_y = prob.gradient(r.y);
            if (!member(r.y, f_mid->gradient(r.y))) out.floor_reached = true;
            return out;
        }
        throw SolverError("sliding: middle level did not reach the outer accuracy in " +
                          std::to_string(cfg.middle.max_iters) + " iterations");
    };

    NatmiResult r = run_accelerated(cfg.outer, outer_problem(prob, middle), x0, on_row);
    return finish(prob, std::move(r), middle_total);
}

}  // namespace hyperfast
