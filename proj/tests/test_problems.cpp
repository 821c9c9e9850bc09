#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "hyperfast/taylor_model.hpp"
#include "oracles.hpp"

using namespace hyperfast;
using namespace testing;

TEST_SUITE("problems") {
    TEST_CASE("libsvm: format examples") {
        Dataset d = parse_libsvm("+1 1:0.5 3:-2.0\n");
        REQUIRE(d.rows() == 1);
        REQUIRE(d.cols() == 3);
        CHECK(d.features(0, 0) == 0.5);
        CHECK(d.features(0, 1) == 0.0);
        CHECK(d.features(0, 2) == -2.0);
        CHECK(d.labels(0) == 1.0);

        d = parse_libsvm("0 2:1\n");
        CHECK(d.labels(0) == -1.0);
        CHECK(d.features.row(0) == (Vector(2) << 0.0, 1.0).finished().transpose());

        CHECK_THROWS_AS(parse_libsvm("1 3:1 2:1\n"), FormatError);
    }

    TEST_CASE("libsvm: rows widen to the largest index, labels map") {
        const Dataset d = parse_libsvm("# comment\n-1 1:1\n\n1 4:2\n+1 2:3 5:1\n");
        CHECK(d.rows() == 3);
        CHECK(d.cols() == 5);
        CHECK(d.labels(0) == -1.0);
        CHECK(d.labels(1) == 1.0);
        CHECK(d.features(1, 3) == 2.0);
        CHECK(d.features(2, 4) == 1.0);
    }

    TEST_CASE("libsvm: errors") {
        CHECK_THROWS_AS(parse_libsvm(""), FormatError);
        CHECK_THROWS_AS(parse_libsvm("# only a comment\n"), FormatError);
        CHECK_THROWS_AS(parse_libsvm("1 0:1\n"), FormatError);
        CHECK_THROWS_AS(parse_libsvm("1 2:1 2:3\n"), FormatError);
        CHECK_THROWS_AS(parse_libsvm("2 1:1\n"), FormatError);
        CHECK_THROWS_AS(parse_libsvm("1 1:abc\n"), FormatError);
        CHECK_THROWS_AS(parse_libsvm("1 1-2\n"), FormatError);
        try {
            parse_libsvm("1 1:1\n1 1:2\nbad line\n");
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
        CHECK_THROWS(load_libsvm("/nonexistent/file.svm"));
    }

    TEST_CASE("libsvm: load from file") {
        const auto path = std::filesystem::temp_directory_path() / "hyperfast_test.svm";
        {
            std::ofstream out(path);
            out << "1 1:1 2:2\n0 2:-1\n";
        }
        const Dataset d = load_libsvm(path);
        CHECK(d.rows() == 2);
        CHECK(d.labels(1) == -1.0);
        std::filesystem::remove(path);
    }

    TEST_CASE("synth_logreg: determinism, normalization, both classes") {
        const Dataset a = synth_logreg(7, 50, 5), b = synth_logreg(7, 50, 5);
        CHECK(a.features == b.features);
        CHECK(a.labels == b.labels);
        CHECK(synth_logreg(8, 50, 5).features != a.features);

        const Dataset s = synth_logreg(1, 3, 2);
        for (Eigen::Index i = 0; i < s.rows(); ++i) CHECK(std::abs(s.features.row(i).norm() - 1.0) <= 1e-12);

        const Dataset f = synth_logreg(7, 200, 20);
        const auto pos = (f.labels.array() > 0.0).count();
        CHECK(pos > 0);
        CHECK(pos < 200);
        CHECK(((f.labels.array() == 1.0) || (f.labels.array() == -1.0)).all());
    }

    TEST_CASE("logreg: value and gradient at 0") {
        const Dataset d = synth_logreg(3, 30, 4);
        auto f = make_logreg(d, 0.0);
        CHECK(f->value(Vector::Zero(4)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
        Vector expect = Vector::Zero(4);
        for (Eigen::Index k = 0; k < d.rows(); ++k) expect -= d.labels(k) * d.features.row(k).transpose();
        expect /= 2.0 * d.rows();
        CHECK((f->gradient(Vector::Zero(4)) - expect).norm() <= 1e-15);
        CHECK(fd_check_grad(*f, Vector::Zero(4)) <= 1e-6);
    }

    TEST_CASE("logreg: c3 against a grid maximization of |psi''''|") {
        const double grid = oracles::grid_abs_max(oracles::logistic_psi4, -10.0, 10.0);
        CHECK(logistic_c3() == doctest::Approx(grid).epsilon(1e-10));
        CHECK(std::abs(oracles::logistic_psi4(0.0)) == doctest::Approx(0.125));

        auto f = fixture_logreg();
        double mean4 = 0.0;
        for (Eigen::Index k = 0; k < f->data().rows(); ++k) mean4 += std::pow(f->data().features.row(k).norm(), 4);
        mean4 /= f->data().rows();
        CHECK(f->lipschitz3() == doctest::Approx(grid * mean4).epsilon(1e-10));
    }

    TEST_CASE("logreg: stable at large margins") {
        auto f = make_logreg(synth_logreg(2, 20, 3), 0.0);
        const Vector x = Vector::Constant(3, 1e3);
        CHECK(std::isfinite(f->value(x)));
        CHECK(f->gradient(x).allFinite());
        CHECK(f->hessian(x).allFinite());
    }

    TEST_CASE("worst case f3 examples") {
        auto f = make_worst_case(3, 2);
        CHECK(f->value(Vector::Zero(2)) == 0.0);
        CHECK(f->gradient(Vector::Zero(2)).isZero(0.0));
        CHECK(f->value(Vector::Ones(2)) == 1.0);
        CHECK(f->gradient(Vector::Ones(2)) == (Vector(2) << 4.0, 0.0).finished());
        const Vector x = (Vector(2) << 1.0, 2.0).finished();
        CHECK(f->value(x) == 2.0);
        CHECK(f->gradient(x) == (Vector(2) << 0.0, 4.0).finished());
        CHECK_THROWS_AS(make_worst_case(2, 3), ConfigError);
        CHECK_THROWS_AS(make_worst_case(4, 3), ConfigError);
    }

    TEST_CASE("quartic family examples") {
        auto f = x4_over_4();
        const Vector two = Vector::Constant(1, 2.0);
        CHECK(f->value(two) == 4.0);
        CHECK(f->gradient(two)[0] == 8.0);
        CHECK(f->hessian(two)(0, 0) == 12.0);

        // D^3 f(x)[s, s] = 6 x s^2 in 1D.
        for (double x : {-1.0, 0.5, 2.0}) {
            const Vector xv = Vector::Constant(1, x), s = Vector::Constant(1, 0.7);
            CHECK(f->third_action(xv, s)[0] == doctest::Approx(6.0 * x * 0.49));
            CHECK(fd_third_action(*f, xv, s, 1e-2)[0] == doctest::Approx(6.0 * x * 0.49).epsilon(1e-8));
        }

        // Q = I, a4 = 0: the third-order model is exact everywhere.
        auto q = half_sq(3);
        const ModelSpec spec = make_model(q, Vector::Ones(3), 0.0);
        Rng rng(1);
        for (int i = 0; i < 10; ++i) {
            const Vector y = rng.normal_vector(3);
            CHECK(model_value(spec, y) == doctest::Approx(q->value(y)).epsilon(1e-14));
        }

        Matrix asym(2, 2);
        asym << 1.0, 0.5, 0.0, 1.0;
        CHECK_THROWS_AS(make_quartic(asym, Vector::Zero(2), 1.0), ConfigError);
        CHECK_THROWS_AS(make_quartic(-Matrix::Identity(2, 2), Vector::Zero(2), 1.0), ConfigError);
        CHECK_THROWS_AS(make_quartic(Matrix::Identity(2, 2), Vector::Zero(2), -1.0), ConfigError);
    }

    TEST_CASE("sum and zero oracles") {
        auto z = std::make_shared<ZeroOracle>(2);
        CHECK(z->is_zero());
        CHECK(z->lipschitz3() == 0.0);
        SumOracle s(make_worst_case(3, 2), half_sq(2, 2.0));
        const Vector x = (Vector(2) << 1.0, 2.0).finished();
        CHECK(s.value(x) == doctest::Approx(2.0 + 2.5));
        CHECK(s.lipschitz3() == doctest::Approx(make_worst_case(3, 2)->lipschitz3() + 2.0));
    }

    TEST_CASE("property: Hessians are PSD at 100 seeded points") {
        Rng rng(7);
        const std::vector<OraclePtr> problems = {random_quartic(rng, 5), make_worst_case(3, 5), fixture_logreg()};
        for (const OraclePtr& f : problems) {
            double min_eig = 0.0;
            for (int i = 0; i < 100; ++i) {
                const Matrix h = f->hessian(rng.in_ball(f->dim(), 2.0));
                min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues()[0]);
            }
            INFO(f->name());
            CHECK(min_eig >= -1e-10);
        }
    }

    TEST_CASE("property: sampled L3 never exceeds the analytic value") {
        Rng rng(3);
        const std::vector<OraclePtr> problems = {x4_over_4(), random_quartic(rng, 4), make_worst_case(3, 4),
                                                 make_logreg(synth_logreg(5, 50, 4), 0.0)};
        for (const OraclePtr& f : problems) {
            const double sampled = sampled_lipschitz3(*f, 200, 17, 2.0);
            INFO(f->name() << " sampled " << sampled << " analytic " << f->lipschitz3());
            CHECK(sampled <= f->lipschitz3() * (1.0 + 1e-6));
            CHECK(sampled > 0.0);
            CHECK(analytic_l3(*f).method == L3Method::analytic_bound);
        }
    }
}
