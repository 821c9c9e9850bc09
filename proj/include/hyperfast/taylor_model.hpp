#pragma once

#include "hyperfast/oracle.hpp"

namespace hyperfast {

/// How the cubic term D^3 f(anchor)[s]^3 of the model is evaluated.
enum class ThirdDerivative {
    automatic,          ///< exact when the oracle provides it, else finite differences
    exact,              ///< oracle third-derivative actions (throws if unavailable)
    finite_difference,  ///< second differences of the gradient
};

/// Frozen third-order Taylor model of f at an anchor, regularized by (H/6)|y - anchor|^4:
///
///   m(y) = f(a) + <g, s> + 1/2 <Hs s, s> + 1/6 D^3 f(a)[s]^3 + (H/6)|s|^4,  s = y - a.
///
/// For H >= L_3 the model is convex.
struct ModelSpec {
    OraclePtr oracle;
    Vector anchor;
    double f_anchor = 0.0;
    Vector grad_anchor;
    Matrix hess_anchor;
    int order = 3;
    double reg = 0.0;  ///< H
    ThirdDerivative third = ThirdDerivative::automatic;

    Eigen::Index dim() const { return anchor.size(); }
    bool exact_third() const;
};

/// Evaluates f, grad f and Hess f at the anchor. Only order 3 is accepted.
ModelSpec make_model(OraclePtr oracle, const VectorRef& anchor, double reg, int order = 3,
                     ThirdDerivative third = ThirdDerivative::automatic);

double model_value(const ModelSpec& spec, const VectorRef& y);

/// grad f(a) + Hs s + 1/2 D^3 f(a)[s, s] + (2H/3)|s|^2 s.
Vector model_grad(const ModelSpec& spec, const VectorRef& y);

/// Hs + D^3 f(a)[s] + (2H/3)(|s|^2 I + 2 s s').
Matrix model_hess(const ModelSpec& spec, const VectorRef& y);

/// D^3 f(a)[s, s] as used by the model (exact or finite-difference).
Vector model_third_action(const ModelSpec& spec, const VectorRef& s);

struct Membership {
    double lhs = 0.0;  ///< |grad m(T)|
    double rhs = 0.0;  ///< gamma |grad f(T)|
    bool member = false;
};

/// Slack added to the right-hand side of the membership test.
double membership_tolerance(const ModelSpec& spec);

/// Tests |grad m(T)| <= gamma |grad f(T)| with a fresh oracle gradient at T.
Membership membership_residual(const ModelSpec& spec, double gamma, const VectorRef& point);

/// Reference minimizer of the model by damped Newton with Armijo backtracking.
/// Throws SolverError after 500 Newton steps (a non-convex model, i.e. H too small).
Vector exact_model_min(const ModelSpec& spec, double tol);
Vector exact_model_min(const ModelSpec& spec);

}  // namespace hyperfast
