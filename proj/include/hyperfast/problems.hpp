#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "hyperfast/oracle.hpp"

namespace hyperfast {

/// Binary classification data: rows a_k with labels y_k in {-1, +1}.
struct Dataset {
    Matrix features;  // m x n
    Vector labels;    // m

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }

    /// Throws ConfigError unless m, n >= 1, labels are +-1 and features are finite.
    void validate() const;
};

enum class L3Method { analytic_bound, sampled };

struct L3Estimate {
    double value = 0.0;
    L3Method method = L3Method::analytic_bound;
};

/// Parses LIBSVM text (`<label> <idx>:<val> ...`, 1-based strictly increasing
/// indices) into a dense dataset. Labels 0/-1 map to -1 and 1/+1 to +1.
Dataset load_libsvm(const std::filesystem::path& path);
Dataset parse_libsvm(std::string_view text);

/// Deterministic synthetic logistic-regression data (see README for the exact
/// generator): unit-norm Gaussian rows, labels from a planted unit separator
/// with 10% of labels flipped.
Dataset synth_logreg(std::uint64_t seed, Eigen::Index m, Eigen::Index n);

/// max_t |psi''''(t)| for psi(t) = log(1 + e^t).
double logistic_c3();

/// f(x) = (1/m) sum log(1 + exp(-y_k <a_k, x>)) + (ridge/2)|x|^2.
/// L_3 = logistic_c3() * (1/m) sum |a_k|^4.
class LogisticOracle final : public Oracle {
  public:
    LogisticOracle(Dataset data, double ridge);

    Eigen::Index dim() const override { return data_.cols(); }
    double lipschitz3() const override { return l3_; }
    double value(const VectorRef& x) const override;
    Vector gradient(const VectorRef& x) const override;
    Matrix hessian(const VectorRef& x) const override;
    bool has_third() const override { return true; }
    Matrix third_matrix(const VectorRef& x, const VectorRef& s) const override;
    Vector third_action(const VectorRef& x, const VectorRef& s) const override;
    std::string name() const override { return "logreg"; }

    const Dataset& data() const { return data_; }
    double ridge() const { return ridge_; }

  private:
    Vector margins(const VectorRef& x) const;

    Dataset data_;
    double ridge_;
    double l3_;
};

/// f_3(x) = |x_1|^4 + |x_2 - x_1|^4 + ... + |x_n - x_{n-1}|^4.
///
/// With D the lower-bidiagonal difference operator and d = Dx,
/// f = sum d_i^4 and D^3 f(x)[u,u,u] = 24 sum d_i (Du)_i^3, so
/// L_3 <= 24 |D|^4 using |w|_6 <= |w|_2. |D| is computed once at construction.
class WorstCaseOracle final : public Oracle {
  public:
    explicit WorstCaseOracle(Eigen::Index n);

    Eigen::Index dim() const override { return n_; }
    double lipschitz3() const override { return l3_; }
    double value(const VectorRef& x) const override;
    Vector gradient(const VectorRef& x) const override;
    Matrix hessian(const VectorRef& x) const override;
    bool has_third() const override { return true; }
    Matrix third_matrix(const VectorRef& x, const VectorRef& s) const override;
    std::string name() const override { return "worst_case"; }

  private:
    Vector diff(const VectorRef& x) const;
    Vector diff_transpose(const VectorRef& d) const;

    Eigen::Index n_;
    double l3_;
};

/// f(x) = (1/2) x'Qx + <c, x> + (a4/4)|x|^4.
///
/// D^3 f(x)[u,v,w] = 2 a4 (<x,u><v,w> + <x,v><u,w> + <x,w><u,v>); the difference
/// at x and y is a symmetric trilinear form maximized on the diagonal at
/// u = (x - y)/|x - y|, giving L_3 = 6 a4 exactly. `l3_floor` lets a pure
/// quadratic (a4 = 0) report a positive constant for the solvers.
class QuarticOracle final : public Oracle {
  public:
    QuarticOracle(Matrix q, Vector c, double a4, double l3_floor = 0.0);

    Eigen::Index dim() const override { return c_.size(); }
    double lipschitz3() const override { return l3_; }
    double value(const VectorRef& x) const override;
    Vector gradient(const VectorRef& x) const override;
    Matrix hessian(const VectorRef& x) const override;
    bool has_third() const override { return true; }
    Matrix third_matrix(const VectorRef& x, const VectorRef& s) const override;
    Vector third_action(const VectorRef& x, const VectorRef& s) const override;
    std::string name() const override { return "quartic"; }

    const Matrix& q() const { return q_; }
    const Vector& c() const { return c_; }
    double a4() const { return a4_; }

  private:
    Matrix q_;
    Vector c_;
    double a4_;
    double l3_;
};

/// The identically-zero function on R^n. Reports L_3 = 0.
class ZeroOracle final : public Oracle {
  public:
    explicit ZeroOracle(Eigen::Index n) : n_(n) {}

    Eigen::Index dim() const override { return n_; }
    double lipschitz3() const override { return 0.0; }
    double value(const VectorRef&) const override { return 0.0; }
    Vector gradient(const VectorRef&) const override { return Vector::Zero(n_); }
    Matrix hessian(const VectorRef&) const override { return Matrix::Zero(n_, n_); }
    bool has_third() const override { return true; }
    Matrix third_matrix(const VectorRef&, const VectorRef&) const override { return Matrix::Zero(n_, n_); }
    bool is_zero() const override { return true; }
    std::string name() const override { return "zero"; }

  private:
    Eigen::Index n_;
};

/// a + b, with L_3 bounded by the sum of the parts' constants.
class SumOracle final : public Oracle {
  public:
    SumOracle(OraclePtr a, OraclePtr b);

    Eigen::Index dim() const override { return a_->dim(); }
    double lipschitz3() const override { return a_->lipschitz3() + b_->lipschitz3(); }
    double value(const VectorRef& x) const override { return a_->value(x) + b_->value(x); }
    Vector gradient(const VectorRef& x) const override { return a_->gradient(x) + b_->gradient(x); }
    Matrix hessian(const VectorRef& x) const override { return a_->hessian(x) + b_->hessian(x); }
    bool has_third() const override { return a_->has_third() && b_->has_third(); }
    Matrix third_matrix(const VectorRef& x, const VectorRef& s) const override;
    Vector third_action(const VectorRef& x, const VectorRef& s) const override;
    bool is_zero() const override { return a_->is_zero() && b_->is_zero(); }
    std::string name() const override { return a_->name() + "+" + b_->name(); }

  private:
    OraclePtr a_;
    OraclePtr b_;
};

std::shared_ptr<LogisticOracle> make_logreg(Dataset data, double ridge);

/// Only p = 3 is supported; any other order throws ConfigError.
std::shared_ptr<WorstCaseOracle> make_worst_case(int p, Eigen::Index n);

std::shared_ptr<QuarticOracle> make_quartic(Matrix q, Vector c, double a4, double l3_floor = 0.0);

/// Analytic L_3 of an oracle, tagged with how it was obtained.
inline L3Estimate analytic_l3(const Oracle& oracle) {
    return {oracle.lipschitz3(), L3Method::analytic_bound};
}

}  // namespace hyperfast
