#pragma once

#include <optional>

#include "hyperfast/oracle.hpp"

namespace hyperfast {

struct BdgmOptions {
    double gamma = 1.0 / 6.0;  ///< relative accuracy of the returned point
    double c_delta = 1.0;      ///< constant in the inner-accuracy formula for delta
    int max_iters = 10000;
    /// Floor on the absolute displacement |tau s| used by the gradient second
    /// difference, relative to max(1, |anchor|). Zero disables the floor.
    double fd_floor = 1.220703125e-4;  // eps^{1/4}
    /// Solve the Bregman step through a one-time eigendecomposition of the
    /// anchor Hessian (O(n) per trial radius) instead of a dense LDLT per trial.
    bool eigen_path = true;
    /// The absolute residual test |g| <= eps is relaxed to this multiple of the
    /// estimated finite-difference roundoff when that is larger.
    double noise_factor = 10.0;
};

/// Setup of one inner solve of the quartic-regularized third-order model
///
///   phi(z) = <g, s> + 1/2 <Hs s, s> + 1/6 D^3 f(a)[s]^3 + (L_3/4)|s|^4,   s = z - a,
///
/// in the Bregman geometry of rho(z) = 1/2 <Hs s, s> + (L_3/4)|s|^4, restricted
/// to the ball |s| <= ball_radius.
struct BdgmState {
    OraclePtr oracle;
    OraclePtr composite;  ///< optional additive term whose gradient enters the residual
    BdgmOptions options;

    Vector anchor;
    Vector grad_anchor;  ///< grad f(anchor), excluding the composite term
    Matrix hess_anchor;
    double l3 = 0.0;
    double eps = 0.0;

    double delta = 0.0;
    double tau = 0.0;
    double ball_radius = 0.0;
    double step_scale = 0.0;  ///< 2 (1 + 1/sqrt 2)

    Vector z;
    int iter = 0;

    Vector hess_eigenvalues;
    Matrix hess_eigenvectors;

    /// The anchor has zero gradient; solve() returns it untouched.
    bool solved_at_anchor() const { return grad_anchor.isZero(0.0); }

    /// delta >= gamma |grad f(anchor)|: the relative test cannot be certified at
    /// this accuracy, meaning the anchor is already eps-accurate.
    bool accuracy_floor() const { return !solved_at_anchor() && delta >= options.gamma * grad_anchor.norm(); }

    /// Effective second-difference multiplier for direction s.
    double fd_tau(const VectorRef& s) const;
};

double bdgm_delta(double eps, double grad_norm, double hess_norm, double l3, double c_delta = 1.0);
double bdgm_tau(double delta, double grad_norm);
double bdgm_ball_radius(double grad_norm, double l3);
double bdgm_step_scale();

/// Evaluates grad f and Hess f at the anchor (one call each) and fixes
/// delta, tau and the feasible ball. `l3` overrides oracle->lipschitz3() when positive.
BdgmState bdgm_setup(OraclePtr oracle, const VectorRef& anchor, double eps, const BdgmOptions& options = {},
                     OraclePtr composite = nullptr, double l3 = 0.0);

/// grad f(a) + Hs s + 1/2 g_tau(z) + L_3 |s|^2 s, with g_tau the second
/// difference of the gradient along s (two gradient calls, none at s = 0).
Vector approx_grad(const BdgmState& state, const VectorRef& z);

/// Gradient of the scaling function rho at z.
Vector rho_grad(const BdgmState& state, const VectorRef& z);

/// argmin over the ball of <g, z - z_i> + a * beta_rho(z_i, z).
Vector bregman_step(const BdgmState& state, const VectorRef& z_i, const VectorRef& g);

struct BdgmResult {
    Vector z;
    int inner_iters = 0;
    Vector grad_at_z;   ///< fresh grad f(z) (plus composite) from the stopping test
    double residual = 0.0;  ///< |approximate model gradient| at z
    bool floor_reached = false;  ///< relative test infeasible at this eps (see accuracy_floor)
};

/// Runs the inner loop until |approx_grad(z)| <= gamma |grad f(z)| - delta and
/// |approx_grad(z)| <= max(eps, noise_factor * finite-difference roundoff).
/// The second test ties the inner work to the target accuracy eps. Sets
/// floor_reached, without a certificate, when both sides of the relative test
/// fall below that absolute tolerance (or delta exceeds it already at the anchor).
/// Throws SolverError when max_iters is exceeded.
BdgmResult bdgm_solve(BdgmState& state);

}  // namespace hyperfast
