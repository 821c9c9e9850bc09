#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "hyperfast/types.hpp"

namespace hyperfast {

/// A smooth convex objective on R^n with a Lipschitz third derivative.
///
/// Implementations are deterministic, immutable after construction, and safe
/// for concurrent evaluation. The third-derivative entry points are optional
/// and exist for verification only; no solver path requires them.
class Oracle {
  public:
    virtual ~Oracle() = default;

    virtual Eigen::Index dim() const = 0;

    /// Lipschitz constant of the third derivative (trilinear operator norm).
    virtual double lipschitz3() const = 0;

    virtual double value(const VectorRef& x) const = 0;
    virtual Vector gradient(const VectorRef& x) const = 0;
    virtual Matrix hessian(const VectorRef& x) const = 0;

    virtual bool has_third() const { return false; }

    /// D^3 f(x)[s] as an n x n matrix. Only valid when has_third().
    virtual Matrix third_matrix(const VectorRef& x, const VectorRef& s) const;

    /// D^3 f(x)[s, s] as a vector. Only valid when has_third().
    virtual Vector third_action(const VectorRef& x, const VectorRef& s) const;

    /// True for the identically-zero function.
    virtual bool is_zero() const { return false; }

    virtual std::string name() const { return "oracle"; }
};

using OraclePtr = std::shared_ptr<const Oracle>;

/// Snapshot of a CountedOracle's counters.
struct CallCounts {
    std::uint64_t value = 0;
    std::uint64_t grad = 0;
    std::uint64_t hess = 0;
    std::uint64_t third = 0;

    friend bool operator==(const CallCounts&, const CallCounts&) = default;
};

/// Forwarding wrapper that counts oracle calls and tracks the running maxima
/// of gradient and Hessian norms over every point it was queried at.
class CountedOracle final : public Oracle {
  public:
    explicit CountedOracle(OraclePtr inner);

    Eigen::Index dim() const override { return inner_->dim(); }
    double lipschitz3() const override { return inner_->lipschitz3(); }
    double value(const VectorRef& x) const override;
    Vector gradient(const VectorRef& x) const override;
    Matrix hessian(const VectorRef& x) const override;
    bool has_third() const override { return inner_->has_third(); }
    Matrix third_matrix(const VectorRef& x, const VectorRef& s) const override;
    Vector third_action(const VectorRef& x, const VectorRef& s) const override;
    bool is_zero() const override { return inner_->is_zero(); }
    std::string name() const override { return inner_->name(); }

    CallCounts counts() const;
    std::uint64_t n_value() const { return n_value_.load(); }
    std::uint64_t n_grad() const { return n_grad_.load(); }
    std::uint64_t n_hess() const { return n_hess_.load(); }

    double max_grad_norm() const { return max_grad_.load(); }
    double max_hess_norm() const { return max_hess_.load(); }

    const OraclePtr& inner() const { return inner_; }

  private:
    OraclePtr inner_;
    mutable std::atomic<std::uint64_t> n_value_{0};
    mutable std::atomic<std::uint64_t> n_grad_{0};
    mutable std::atomic<std::uint64_t> n_hess_{0};
    mutable std::atomic<std::uint64_t> n_third_{0};
    mutable std::atomic<double> max_grad_{0.0};
    mutable std::atomic<double> max_hess_{0.0};
};

std::shared_ptr<CountedOracle> counted(OraclePtr oracle);

/// Largest absolute eigenvalue of a symmetric matrix.
double operator_norm(const MatrixRef& symmetric);

/// Default central-difference step, (machine eps)^{1/3} * max(1, |x|).
double default_fd_step(const VectorRef& x);

/// Relative error |grad f(x) - central differences of f| / max(1, |grad f(x)|).
double fd_check_grad(const Oracle& oracle, const VectorRef& x, double h);
double fd_check_grad(const Oracle& oracle, const VectorRef& x);

/// Relative Frobenius error of the Hessian against central differences of the gradient.
double fd_check_hess(const Oracle& oracle, const VectorRef& x, double h);
double fd_check_hess(const Oracle& oracle, const VectorRef& x);

/// Second central difference of the gradient along s:
///   (grad f(x + tau s) + grad f(x - tau s) - 2 grad f(x)) / tau^2  ~  D^3 f(x)[s, s].
/// `grad_x` is the cached gradient at x. Costs two gradient calls; zero when s = 0.
Vector fd_third_action(const Oracle& oracle, const VectorRef& x, const VectorRef& grad_x,
                       const VectorRef& s, double tau);
Vector fd_third_action(const Oracle& oracle, const VectorRef& x, const VectorRef& s, double tau);

/// Central difference of Hessians along s, ~ D^3 f(x)[s]. Verification only.
Matrix fd_third_matrix(const Oracle& oracle, const VectorRef& x, const VectorRef& s, double h);

/// Sampled lower estimate of L_3: max over random (x, y, s) with |x|, |y| <= radius of
/// |(D^3 f(x) - D^3 f(y))[s, s]| / (|x - y| |s|^2), third actions by finite differences.
double sampled_lipschitz3(const Oracle& oracle, int samples, std::uint64_t seed, double radius);

}  // namespace hyperfast
