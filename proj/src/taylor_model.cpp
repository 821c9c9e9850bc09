#include "hyperfast/taylor_model.hpp"

#include <cmath>
#include <limits>

namespace hyperfast {

namespace {

double fd_unit_step(const ModelSpec& spec) {
    return std::pow(std::numeric_limits<double>::epsilon(), 0.25) * std::max(1.0, spec.anchor.norm());
}

}  // namespace

bool ModelSpec::exact_third() const {
    switch (third) {
        case ThirdDerivative::exact:
            return true;
        case ThirdDerivative::finite_difference:
            return false;
        case ThirdDerivative::automatic:
            break;
    }
    return oracle->has_third();
}

ModelSpec make_model(OraclePtr oracle, const VectorRef& anchor, double reg, int order, ThirdDerivative third) {
    if (!oracle) throw ConfigError("make_model: null oracle");
    if (order != 3) throw ConfigError("make_model: only order p = 3 is supported");
    if (!(reg >= 0.0)) throw ConfigError("make_model: regularization must be non-negative");
    require_same_dim(anchor.size(), oracle->dim(), "make_model");
    if (third == ThirdDerivative::exact && !oracle->has_third()) {
        throw ConfigError("make_model: oracle has no exact third derivative");
    }
    ModelSpec spec;
    spec.anchor = anchor;
    spec.f_anchor = oracle->value(anchor);
    spec.grad_anchor = oracle->gradient(anchor);
    spec.hess_anchor = oracle->hessian(anchor);
    spec.order = order;
    spec.reg = reg;
    spec.third = third;
    spec.oracle = std::move(oracle);
    return spec;
}

Vector model_third_action(const ModelSpec& spec, const VectorRef& s) {
    if (spec.exact_third()) return spec.oracle->third_action(spec.anchor, s);
    const double ns = s.norm();
    if (ns == 0.0) return Vector::Zero(s.size());
    const Vector dir = s / ns;
    return ns * ns * fd_third_action(*spec.oracle, spec.anchor, spec.grad_anchor, dir, fd_unit_step(spec));
}

double model_value(const ModelSpec& spec, const VectorRef& y) {
    require_same_dim(y.size(), spec.dim(), "model_value");
    const Vector s = y - spec.anchor;
    const double r2 = s.squaredNorm();
    return spec.f_anchor + spec.grad_anchor.dot(s) + 0.5 * s.dot(spec.hess_anchor * s) +
           model_third_action(spec, s).dot(s) / 6.0 + spec.reg / 6.0 * r2 * r2;
}

Vector model_grad(const ModelSpec& spec, const VectorRef& y) {
    require_same_dim(y.size(), spec.dim(), "model_grad");
    const Vector s = y - spec.anchor;
    return spec.grad_anchor + spec.hess_anchor * s + 0.5 * model_third_action(spec, s) +
           (2.0 * spec.reg / 3.0) * s.squaredNorm() * s;
}

Matrix model_hess(const ModelSpec& spec, const VectorRef& y) {
    require_same_dim(y.size(), spec.dim(), "model_hess");
    const Vector s = y - spec.anchor;
    Matrix h = spec.hess_anchor;
    const double ns = s.norm();
    if (ns > 0.0) {
        if (spec.exact_third()) {
            h += spec.oracle->third_matrix(spec.anchor, s);
        } else {
            const double step = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, spec.anchor.norm());
            h += ns * fd_third_matrix(*spec.oracle, spec.anchor, s / ns, step);
        }
    }
    const double c = 2.0 * spec.reg / 3.0;
    h += 2.0 * c * s * s.transpose();
    h.diagonal().array() += c * s.squaredNorm();
    return h;
}

double membership_tolerance(const ModelSpec& spec) {
    return 1e-12 * (1.0 + spec.grad_anchor.norm());
}

Membership membership_residual(const ModelSpec& spec, double gamma, const VectorRef& point) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("membership_residual: gamma must lie in [0, 1]");
    Membership m;
    m.lhs = model_grad(spec, point).norm();
    m.rhs = gamma * spec.oracle->gradient(point).norm();
    m.member = m.lhs <= m.rhs + membership_tolerance(spec);
    return m;
}

Vector exact_model_min(const ModelSpec& spec, double tol) {
    if (!(tol > 0.0)) throw ConfigError("exact_model_min: tol must be positive");
    constexpr int max_newton = 500;
    Vector y = spec.anchor;
    Vector g = model_grad(spec, y);
    double fy = model_value(spec, y);
    for (int it = 0; it < max_newton; ++it) {
        const double gn = g.norm();
        if (gn <= tol) return y;

        const Matrix h = model_hess(spec, y);
        Vector d;
        Eigen::LDLT<Matrix> ldlt(h);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) d = -ldlt.solve(g);
        if (d.size() == 0 || !d.allFinite() || d.dot(g) >= 0.0) {
            // Singular or indefinite: shift into positive definiteness.
            Eigen::SelfAdjointEigenSolver<Matrix> es(h);
            const double shift = std::max(0.0, -es.eigenvalues()[0]) + 1e-12 * (1.0 + operator_norm(h)) + 1e-300;
            const Vector lam = (es.eigenvalues().array() + shift).matrix();
            d = -es.eigenvectors() * (es.eigenvectors().transpose() * g).cwiseQuotient(lam);
        }

        const double slope = g.dot(d);
        Vector trial = y + d;
        double ft = model_value(spec, trial);
        Vector g_trial = model_grad(spec, trial);
        // Near the minimizer the Armijo test drowns in roundoff of the value;
        // there a full step that shrinks the gradient is accepted instead.
        const bool roundoff = ft - fy <= 1e-13 * (1.0 + std::abs(fy)) && g_trial.norm() < gn;
        if (ft > fy + 1e-4 * slope && !roundoff) {
            double t = 1.0;
            while (ft > fy + 1e-4 * t * slope && t > 1e-12) {
                t *= 0.5;
                trial = y + t * d;
                ft = model_value(spec, trial);
            }
            if (ft > fy + 1e-4 * t * slope) {
                throw SolverError("exact_model_min: line search stalled at |grad| = " + std::to_string(gn));
            }
            g_trial = model_grad(spec, trial);
        }
        y = std::move(trial);
        g = std::move(g_trial);
        fy = ft;
    }
    if (g.norm() <= tol) return y;
    throw SolverError("exact_model_min: no convergence in 500 Newton steps (|grad| = " + std::to_string(g.norm()) +
                      "); model may be non-convex");
}

Vector exact_model_min(const ModelSpec& spec) {
    return exact_model_min(spec, 1e-12 * (1.0 + spec.grad_anchor.norm()));
}

}  // namespace hyperfast
