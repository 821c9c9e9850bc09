#include "hyperfast/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyperfast/random.hpp"

namespace hyperfast {

namespace {

void atomic_max(std::atomic<double>& target, double v) {
    double cur = target.load();
    while (v > cur && !target.compare_exchange_weak(cur, v)) {
    }
}

void check_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw OracleError(std::string("non-finite ") + what);
}

void check_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw OracleError(std::string("non-finite ") + what);
}

}  // namespace

Matrix Oracle::third_matrix(const VectorRef&, const VectorRef&) const {
    throw OracleError(name() + ": no third-derivative action available");
}

Vector Oracle::third_action(const VectorRef& x, const VectorRef& s) const {
    return third_matrix(x, s) * s;
}

CountedOracle::CountedOracle(OraclePtr inner) : inner_(std::move(inner)) {
    if (!inner_) throw ConfigError("counted: null oracle");
}

double CountedOracle::value(const VectorRef& x) const {
    ++n_value_;
    return inner_->value(x);
}

Vector CountedOracle::gradient(const VectorRef& x) const {
    ++n_grad_;
    Vector g = inner_->gradient(x);
    atomic_max(max_grad_, g.norm());
    return g;
}

Matrix CountedOracle::hessian(const VectorRef& x) const {
    ++n_hess_;
    Matrix h = inner_->hessian(x);
    atomic_max(max_hess_, operator_norm(h));
    return h;
}

Matrix CountedOracle::third_matrix(const VectorRef& x, const VectorRef& s) const {
    ++n_third_;
    return inner_->third_matrix(x, s);
}

Vector CountedOracle::third_action(const VectorRef& x, const VectorRef& s) const {
    ++n_third_;
    return inner_->third_action(x, s);
}

CallCounts CountedOracle::counts() const {
    return {n_value_.load(), n_grad_.load(), n_hess_.load(), n_third_.load()};
}

std::shared_ptr<CountedOracle> counted(OraclePtr oracle) {
    return std::make_shared<CountedOracle>(std::move(oracle));
}

double operator_norm(const MatrixRef& symmetric) {
    if (symmetric.size() == 0) return 0.0;
    if (symmetric.rows() == 1) return std::abs(symmetric(0, 0));
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

double default_fd_step(const VectorRef& x) {
    return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm());
}

double fd_check_grad(const Oracle& oracle, const VectorRef& x, double h) {
    if (!(h > 0.0)) throw ConfigError("fd_check_grad: step must be positive");
    if (!x.allFinite()) throw ConfigError("fd_check_grad: non-finite point");
    const Vector g = oracle.gradient(x);
    check_finite(g, "gradient");
    Vector est(x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = xp[i];
        xp[i] = xi + h;
        const double fp = oracle.value(xp);
        xp[i] = xi - h;
        const double fm = oracle.value(xp);
        xp[i] = xi;
        est[i] = (fp - fm) / (2.0 * h);
    }
    check_finite(est, "function value");
    return (g - est).norm() / std::max(1.0, g.norm());
}

double fd_check_grad(const Oracle& oracle, const VectorRef& x) {
    return fd_check_grad(oracle, x, default_fd_step(x));
}

double fd_check_hess(const Oracle& oracle, const VectorRef& x, double h) {
    if (!(h > 0.0)) throw ConfigError("fd_check_hess: step must be positive");
    if (!x.allFinite()) throw ConfigError("fd_check_hess: non-finite point");
    const Matrix hess = oracle.hessian(x);
    check_finite(hess, "Hessian");
    Matrix est(x.size(), x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = xp[i];
        xp[i] = xi + h;
        const Vector gp = oracle.gradient(xp);
        xp[i] = xi - h;
        const Vector gm = oracle.gradient(xp);
        xp[i] = xi;
        est.col(i) = (gp - gm) / (2.0 * h);
    }
    check_finite(est, "gradient");
    return (hess - est).norm() / std::max(1.0, hess.norm());
}

double fd_check_hess(const Oracle& oracle, const VectorRef& x) {
    return fd_check_hess(oracle, x, default_fd_step(x));
}

Vector fd_third_action(const Oracle& oracle, const VectorRef& x, const VectorRef& grad_x,
                       const VectorRef& s, double tau) {
    if (!(tau > 0.0)) throw ConfigError("fd_third_action: tau must be positive");
    if (s.isZero(0.0)) return Vector::Zero(x.size());
    const Vector gp = oracle.gradient(x + tau * s);
    const Vector gm = oracle.gradient(x - tau * s);
    return (gp + gm - 2.0 * grad_x) / (tau * tau);
}

Vector fd_third_action(const Oracle& oracle, const VectorRef& x, const VectorRef& s, double tau) {
    if (s.isZero(0.0)) return Vector::Zero(x.size());
    return fd_third_action(oracle, x, oracle.gradient(x), s, tau);
}

Matrix fd_third_matrix(const Oracle& oracle, const VectorRef& x, const VectorRef& s, double h) {
    if (!(h > 0.0)) throw ConfigError("fd_third_matrix: step must be positive");
    const Matrix hp = oracle.hessian(x + h * s);
    const Matrix hm = oracle.hessian(x - h * s);
    return (hp - hm) / (2.0 * h);
}

double sampled_lipschitz3(const Oracle& oracle, int samples, std::uint64_t seed, double radius) {
    Rng rng(seed);
    const auto n = oracle.dim();
    const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.25) * std::max(1.0, radius);
    double best = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vector x = rng.in_ball(n, radius);
        const Vector y = rng.in_ball(n, radius);
        Vector s = rng.normal_vector(n);
        s /= s.norm();
        const double dist = (x - y).norm();
        if (dist < 1e-3 * radius) continue;
        const Vector tx = fd_third_action(oracle, x, s, h);
        const Vector ty = fd_third_action(oracle, y, s, h);
        best = std::max(best, (tx - ty).norm() / dist);
    }
    return best;
}

}  // namespace hyperfast
