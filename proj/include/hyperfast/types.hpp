#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hyperfast {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

using VectorRef = Eigen::Ref<const Vector>;
using MatrixRef = Eigen::Ref<const Matrix>;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files (LIBSVM, config).
class FormatError : public Error {
  public:
    using Error::Error;
};

/// Invalid parameters or configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// An oracle produced non-finite or inconsistent output.
class OracleError : public Error {
  public:
    using Error::Error;
};

/// A solver failed to reach its stopping condition.
class SolverError : public Error {
  public:
    using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& v) {
    return v.allFinite();
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw ConfigError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
    }
}

}  // namespace hyperfast
