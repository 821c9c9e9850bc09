#include "hyperfast/bdgm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hyperfast {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Solves (Hs + shift I) s = c.
Vector shifted_solve(const BdgmState& st, const Vector& c, double shift) {
    if (st.options.eigen_path) {
        const Vector proj = st.hess_eigenvectors.transpose() * c;
        const Vector den = (st.hess_eigenvalues.array() + shift).matrix();
        return st.hess_eigenvectors * proj.cwiseQuotient(den);
    }
    Matrix m = st.hess_anchor;
    m.diagonal().array() += shift;
    return Eigen::LDLT<Matrix>(m).solve(c);
}

}  // namespace

double BdgmState::fd_tau(const VectorRef& s) const {
    const double ns = s.norm();
    if (ns == 0.0 || options.fd_floor <= 0.0) return tau;
    return std::max(tau, options.fd_floor * std::max(1.0, anchor.norm()) / ns);
}

double bdgm_delta(double eps, double grad_norm, double hess_norm, double l3, double c_delta) {
    return c_delta * std::pow(eps, 1.5) / (std::sqrt(grad_norm) + std::pow(hess_norm, 1.5) / std::sqrt(l3));
}

double bdgm_tau(double delta, double grad_norm) {
    return 3.0 * delta / (8.0 * (2.0 + kSqrt2) * grad_norm);
}

double bdgm_ball_radius(double grad_norm, double l3) {
    return 2.0 * std::cbrt((2.0 + kSqrt2) * grad_norm / l3);
}

double bdgm_step_scale() {
    return 2.0 * (1.0 + 1.0 / kSqrt2);
}

BdgmState bdgm_setup(OraclePtr oracle, const VectorRef& anchor, double eps, const BdgmOptions& options,
                     OraclePtr composite, double l3) {
    if (!oracle) throw ConfigError("bdgm_setup: null oracle");
    if (!(eps > 0.0)) throw ConfigError("bdgm_setup: eps must be positive");
    if (options.max_iters < 1) throw ConfigError("bdgm_setup: max_iters must be positive");
    require_same_dim(anchor.size(), oracle->dim(), "bdgm_setup");
    if (composite) require_same_dim(composite->dim(), oracle->dim(), "bdgm_setup composite");

    BdgmState st;
    st.l3 = l3 > 0.0 ? l3 : oracle->lipschitz3();
    if (!(st.l3 > 0.0)) throw ConfigError("bdgm_setup: L3 must be positive");
    st.oracle = std::move(oracle);
    st.composite = std::move(composite);
    st.options = options;
    st.eps = eps;
    st.anchor = anchor;
    st.z = anchor;
    st.grad_anchor = st.oracle->gradient(anchor);
    st.hess_anchor = st.oracle->hessian(anchor);
    st.step_scale = bdgm_step_scale();
    if (!st.grad_anchor.allFinite() || !st.hess_anchor.allFinite()) {
        throw OracleError("bdgm_setup: non-finite derivative at anchor");
    }

    if (options.eigen_path) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(st.hess_anchor);
        // Convexity makes the spectrum non-negative; clip roundoff below zero.
        st.hess_eigenvalues = es.eigenvalues().cwiseMax(0.0);
        st.hess_eigenvectors = es.eigenvectors();
    }

    const double gn = st.grad_anchor.norm();
    if (gn > 0.0) {
        st.delta = bdgm_delta(eps, gn, operator_norm(st.hess_anchor), st.l3, options.c_delta);
        st.tau = bdgm_tau(st.delta, gn);
        st.ball_radius = bdgm_ball_radius(gn, st.l3);
    }
    return st;
}

namespace {

// Approximate model gradient plus a bound on the roundoff carried by the
// gradient second difference: 1/2 * 4 eps max|grad| / tau^2.
Vector approx_grad_with_noise(const BdgmState& st, const VectorRef& z, double& noise) {
    require_same_dim(z.size(), st.anchor.size(), "approx_grad");
    const Vector s = z - st.anchor;
    const Vector hs = st.hess_anchor * s;
    const double s2 = s.squaredNorm();
    Vector g = st.grad_anchor + hs + st.l3 * s2 * s;
    // Roundoff in assembling g from terms that nearly cancel.
    const double assembly = 4.0 * std::numeric_limits<double>::epsilon() *
                            (st.grad_anchor.norm() + hs.norm() + st.l3 * s2 * std::sqrt(s2));
    noise = 0.0;
    if (!s.isZero(0.0)) {
        const double tau = st.fd_tau(s);
        const Vector gp = st.oracle->gradient(st.anchor + tau * s);
        const Vector gm = st.oracle->gradient(st.anchor - tau * s);
        g += 0.5 * (gp + gm - 2.0 * st.grad_anchor) / (tau * tau);
        const double scale = std::max({gp.norm(), gm.norm(), st.grad_anchor.norm()});
        noise = 2.0 * std::numeric_limits<double>::epsilon() * scale / (tau * tau);
    }
    noise += assembly;
    return g;
}

}  // namespace

Vector approx_grad(const BdgmState& st, const VectorRef& z) {
    double noise = 0.0;
    return approx_grad_with_noise(st, z, noise);
}

Vector rho_grad(const BdgmState& st, const VectorRef& z) {
    const Vector s = z - st.anchor;
    return st.hess_anchor * s + st.l3 * s.squaredNorm() * s;
}

Vector bregman_step(const BdgmState& st, const VectorRef& z_i, const VectorRef& g) {
    if (!g.allFinite()) throw SolverError("bregman_step: non-finite gradient");
    require_same_dim(z_i.size(), st.anchor.size(), "bregman_step");

    // First-order condition: grad rho(z) = grad rho(z_i) - g / a =: c.
    const Vector c = rho_grad(st, z_i) - g / st.step_scale;
    const double cn = c.norm();
    if (cn == 0.0) return st.anchor;

    // |s(r)| with (Hs + L3 r^2 I) s(r) = c is non-increasing in r; find |s(r)| = r.
    auto radius_gap = [&](double r) { return shifted_solve(st, c, st.l3 * r * r).norm() - r; };

    const double hess_norm =
        st.options.eigen_path ? st.hess_eigenvalues.maxCoeff() : operator_norm(st.hess_anchor);
    double hi = std::cbrt(cn / st.l3);
    double lo = std::min(hi, cn / (hess_norm + st.l3 * hi * hi));
    if (radius_gap(hi) > 1e-12 * hi || radius_gap(lo) < -1e-12 * lo) {
        throw SolverError("bregman_step: invalid radius bracket");
    }
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        (radius_gap(mid) > 0.0 ? lo : hi) = mid;
    }
    double r = 0.5 * (lo + hi);

    if (st.ball_radius > 0.0 && r > st.ball_radius) {
        // Boundary case: (Hs + (L3 R^2 + nu) I) s = c with |s| = R, nu >= 0.
        const double big_r = st.ball_radius;
        const double base = st.l3 * big_r * big_r;
        double nu_lo = 0.0;
        double nu_hi = cn / big_r;
        while (nu_hi - nu_lo > 1e-15 * (base + nu_hi)) {
            const double mid = 0.5 * (nu_lo + nu_hi);
            (shifted_solve(st, c, base + mid).norm() > big_r ? nu_lo : nu_hi) = mid;
        }
        return st.anchor + shifted_solve(st, c, base + 0.5 * (nu_lo + nu_hi));
    }
    return st.anchor + shifted_solve(st, c, st.l3 * r * r);
}

BdgmResult bdgm_solve(BdgmState& st) {
    BdgmResult res;
    auto composite_grad = [&](const Vector& z) -> Vector {
        return st.composite ? st.composite->gradient(z) : Vector::Zero(z.size());
    };

    if (st.solved_at_anchor() || st.accuracy_floor()) {
        res.floor_reached = !st.solved_at_anchor();
        res.z = st.anchor;
        res.grad_at_z = st.grad_anchor + composite_grad(st.anchor);
        res.residual = res.grad_at_z.norm();
        return res;
    }

    st.z = st.anchor;
    st.iter = 0;
    double last_lhs = 0.0;
    double last_rhs = 0.0;
    for (;;) {
        const Vector hz = composite_grad(st.z);
        double noise = 0.0;
        const Vector g = approx_grad_with_noise(st, st.z, noise) + hz;
        const Vector fz = (st.iter == 0 ? st.grad_anchor : st.oracle->gradient(st.z)) + hz;
        last_lhs = g.norm();
        last_rhs = st.options.gamma * fz.norm() - st.delta;
        const double abs_tol = std::max(st.eps, st.options.noise_factor * noise);
        // The model is solved to eps but |grad f(z)| is itself at that level (or
        // at roundoff) so the relative certificate is out of reach: z is as
        // accurate as this eps asks for.
        const bool floor = last_lhs <= abs_tol && last_rhs <= abs_tol;
        if ((last_lhs <= last_rhs && last_lhs <= abs_tol) || floor) {
            res.z = st.z;
            res.inner_iters = st.iter;
            res.grad_at_z = fz;
            res.residual = last_lhs;
            res.floor_reached = floor && last_lhs > last_rhs;
            return res;
        }
        if (st.iter >= st.options.max_iters) break;
        st.z = bregman_step(st, st.z, g);
        ++st.iter;
    }
    std::ostringstream msg;
    msg.precision(6);
    msg << "bdgm_solve: no convergence in " << st.options.max_iters << " iterations (|g| = " << last_lhs
        << ", gamma |grad f| - delta = " << last_rhs << ")";
    throw SolverError(msg.str());
}

}  // namespace hyperfast
