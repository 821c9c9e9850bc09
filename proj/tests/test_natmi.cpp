#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "hyperfast/harness.hpp"
#include "hyperfast/natmi.hpp"
#include "hyperfast/taylor_model.hpp"

using namespace hyperfast;
using namespace testing;

namespace {

NatmiConfig with(int k, double eps = 1e-10) {
    NatmiConfig c;
    c.max_iters = k;
    c.eps = eps;
    return c;
}

// Every accepted step of a run: window, exact-D3 membership, sigma contraction,
// the A recursion, and the a-priori bound on the model gradient.
void check_invariants(const OraclePtr& f, const NatmiResult& r) {
    const double l3 = f->lipschitz3();
    const double h = 1.5 * l3;
    const double gamma = 1.0 / 6.0;
    double a_prev = 0.0;
    for (const StepInfo& s : r.steps) {
        CHECK(lambda_window(s.lambda, s.radius, l3));
        CHECK(s.sigma <= 0.6 + 1e-8);
        CHECK(s.A == doctest::Approx(s.a * s.a / s.lambda).epsilon(1e-10));
        CHECK(s.A == doctest::Approx(a_prev + s.a).epsilon(1e-12));
        a_prev = s.A;
        if (f->has_third()) {
            const ModelSpec spec = make_model(f, s.x_tilde, h, 3, ThirdDerivative::exact);
            const Membership m = membership_residual(spec, gamma, s.y);
            CHECK(m.member);
            const double grad_bound = gamma / (1.0 - gamma) * (4.0 * h + l3) / 6.0 * std::pow(s.radius, 3);
            CHECK(m.lhs <= grad_bound * (1.0 + 1e-8) + membership_tolerance(spec));
        }
    }
}

}  // namespace

TEST_SUITE("natmi") {
    TEST_CASE("validate_params table") {
        NatmiConfig c;
        ParamReport r = validate_params(c);
        CHECK(r.ok);
        CHECK(std::abs(r.sigma - 0.6) <= 1e-15);

        c.gamma = 0.0;
        c.xi = 1.0;
        r = validate_params(c);
        CHECK(r.ok);
        CHECK(std::abs(r.sigma - 0.5) <= 1e-15);

        c.gamma = 0.5;
        r = validate_params(c);
        CHECK_FALSE(r.ok);
        CHECK(r.violation.find("2 gamma") != std::string::npos);

        c = {};
        c.order = 2;
        CHECK_FALSE(validate_params(c).ok);
        c = {};
        c.xi = 0.9;
        CHECK_FALSE(validate_params(c).ok);
        c = {};
        c.gamma = 1.0;
        CHECK_FALSE(validate_params(c).ok);
    }

    TEST_CASE("lambda_window examples") {
        // L3 = 24, r = 0.1: lambda in [0.5/0.18, 0.75/0.18].
        CHECK(lambda_window(2.78, 0.1, 24.0));
        CHECK(lambda_window(4.16, 0.1, 24.0));
        CHECK_FALSE(lambda_window(2.77, 0.1, 24.0));
        CHECK_FALSE(lambda_window(4.17, 0.1, 24.0));
        for (double lambda : {1e-3, 1.0, 1e9}) CHECK_FALSE(lambda_window(lambda, 0.0, 24.0));
        // lambda 3 L3 r^2 / 4 = 0.6
        CHECK(lambda_window(0.6 * 4.0 / (3.0 * 2.0 * 0.25), 0.5, 2.0));
    }

    TEST_CASE("step_weight recursion") {
        CHECK(step_weight(1.0, 0.0) == 1.0);
        CHECK(step_weight(1.0, 1.0) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));
        const double a = step_weight(0.37, 2.5);
        CHECK(a * a == doctest::Approx(0.37 * (2.5 + a)));
    }

    TEST_CASE("first step aims at the window midpoint") {
        auto f = x4_over_4();
        const NatmiResult r = natmi_solve(with(1), f, Vector::Ones(1));
        REQUIRE(r.steps.size() == 1);
        const StepInfo& s = r.steps[0];
        CHECK(window_value(s.lambda, s.radius, f->lipschitz3()) == doctest::Approx(0.625));
        CHECK(s.x_tilde == Vector::Ones(1));
        CHECK(s.A == doctest::Approx(s.lambda));
    }

    TEST_CASE("lambda search on 1D quadratic needs few trials") {
        auto f = half_sq(1);
        const NatmiResult r = natmi_solve(with(10), f, Vector::Ones(1));
        for (const StepInfo& s : r.steps) CHECK(s.trials <= 40);
        check_invariants(f, r);
    }

    TEST_CASE("quadratic from e1 converges within 5 iterations") {
        auto f = make_quartic(2.0 * Matrix::Identity(3, 3), Vector::Zero(3), 0.0, 1.0);
        const NatmiResult r = natmi_solve(with(5), f, Vector::Unit(3, 0));
        CHECK(f->value(r.y) < 1e-12);
        check_invariants(f, r);
    }

    TEST_CASE("x0 optimal returns x0 at k = 0") {
        auto f = x4_over_4();
        const NatmiResult r = natmi_solve(with(30), f, Vector::Zero(1));
        CHECK(r.state.k == 0);
        CHECK(r.trace.empty());
        CHECK(r.y == Vector::Zero(1));
        CHECK(r.state.converged);
    }

    TEST_CASE("x^4/4 from 1: rate slope") {
        auto f = x4_over_4();
        const NatmiResult r = natmi_solve(with(30), f, Vector::Ones(1));
        CHECK(fit_rate(r.trace, 3, 30, 0.0) <= -3.5);
        check_invariants(f, r);
    }

    TEST_CASE("invariants on the problem suite") {
        Rng rng(3);
        const std::vector<OraclePtr> problems = {random_quartic(rng, 5), make_worst_case(3, 5),
                                                 make_logreg(synth_logreg(4, 60, 6), 1e-3)};
        for (const OraclePtr& f : problems) {
            const NatmiResult r = natmi_solve(with(12), f, Vector::Ones(f->dim()));
            INFO(f->name());
            CHECK(r.steps.size() > 2);
            check_invariants(f, r);
            for (std::size_t i = 1; i < r.trace.size(); ++i) {
                CHECK(r.trace[i].k == r.trace[i - 1].k + 1);
                CHECK(r.trace[i].n_grad >= r.trace[i - 1].n_grad);
                CHECK(r.trace[i].n_hess >= r.trace[i - 1].n_hess);
                CHECK(r.trace[i].max_grad_norm >= r.trace[i - 1].max_grad_norm);
                CHECK(r.trace[i].max_hess_norm >= r.trace[i - 1].max_hess_norm);
            }
        }
    }

    TEST_CASE("exact subsolver follows the same path") {
        auto f = make_worst_case(3, 4);
        NatmiConfig c = with(10);
        const NatmiResult a = natmi_solve(c, f, Vector::Ones(4));
        c.subsolver = Subsolver::exact;
        const NatmiResult b = natmi_solve(c, f, Vector::Ones(4));
        REQUIRE(a.trace.size() == b.trace.size());
        CHECK(a.trace.back().f == doctest::Approx(b.trace.back().f).epsilon(1e-4));
        CHECK(b.trace.back().inner_iters == 0);
        check_invariants(f, b);
    }

    TEST_CASE("grad_tol stops early") {
        NatmiConfig c = with(30);
        c.grad_tol = 1e-3;
        const NatmiResult r = natmi_solve(c, x4_over_4(), Vector::Ones(1));
        REQUIRE_FALSE(r.trace.empty());
        CHECK(r.trace.back().grad_norm <= 1e-3);
        CHECK(r.trace.size() < 30);
    }

    TEST_CASE("configuration errors") {
        NatmiConfig c;
        c.xi = 2.0;
        CHECK_THROWS_AS(natmi_solve(c, x4_over_4(), Vector::Ones(1)), ConfigError);
        c = {};
        c.gamma = 0.5;
        c.xi = 1.5;
        CHECK_THROWS_AS(natmi_solve(c, x4_over_4(), Vector::Ones(1)), ConfigError);
        CHECK_THROWS_AS(natmi_solve({}, x4_over_4(), Vector::Ones(2)), ConfigError);
        CHECK_THROWS_AS(natmi_solve({}, nullptr, Vector::Ones(1)), ConfigError);
    }
}
