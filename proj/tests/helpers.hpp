#pragma once

#include <string>

#include "hyperfast/problems.hpp"
#include "hyperfast/random.hpp"

namespace testing {

using namespace hyperfast;

inline std::shared_ptr<QuarticOracle> x4_over_4() {
    return make_quartic(Matrix::Zero(1, 1), Vector::Zero(1), 1.0);
}

// f(x) = x^4 (a4 = 4 since the family is (a4/4)|x|^4).
inline std::shared_ptr<QuarticOracle> x4() {
    return make_quartic(Matrix::Zero(1, 1), Vector::Zero(1), 4.0);
}

inline std::shared_ptr<QuarticOracle> half_sq(Eigen::Index n, double l3_floor = 1.0) {
    return make_quartic(Matrix::Identity(n, n), Vector::Zero(n), 0.0, l3_floor);
}

// Random member of the quartic family: Q = B'B / n, c ~ N(0, I), a4 in [0.5, 2].
inline std::shared_ptr<QuarticOracle> random_quartic(Rng& rng, Eigen::Index n) {
    Matrix b(n, n);
    for (Eigen::Index j = 0; j < n; ++j) b.col(j) = rng.normal_vector(n);
    Matrix q = b.transpose() * b / static_cast<double>(n);
    q = 0.5 * (q + q.transpose());
    const Vector c = rng.normal_vector(n);
    return make_quartic(q, c, rng.uniform(0.5, 2.0));
}

inline std::shared_ptr<LogisticOracle> fixture_logreg() {
    return make_logreg(synth_logreg(7, 200, 20), 1e-3);
}

inline std::string fixtures_dir() {
    return HYPERFAST_FIXTURES;
}

}  // namespace testing
