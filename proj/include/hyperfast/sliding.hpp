#pragma once

#include <memory>

#include "hyperfast/natmi.hpp"
#include "hyperfast/taylor_model.hpp"

namespace hyperfast {

/// The regularized third-order model of g at a fixed anchor, exposed as an
/// ordinary oracle. It is a quartic polynomial in s = y - anchor; the third
/// derivative tensor of g at the anchor is assembled once from second
/// differences of grad g (2 n^2 gradient calls), so evaluating the model and
/// its derivatives afterwards costs no calls to g.
class TaylorModelOracle final : public Oracle {
  public:
    TaylorModelOracle(OraclePtr g, const VectorRef& anchor, double reg);

    Eigen::Index dim() const override { return anchor_.size(); }
    /// The cubic part has a constant third derivative; the (H/6)|s|^4 term has L_3 = 4H.
    double lipschitz3() const override { return 4.0 * reg_; }
    double value(const VectorRef& y) const override;
    Vector gradient(const VectorRef& y) const override;
    Matrix hessian(const VectorRef& y) const override;
    bool has_third() const override { return true; }
    Matrix third_matrix(const VectorRef& y, const VectorRef& u) const override;
    std::string name() const override { return "model(" + g_name_ + ")"; }

    const Vector& anchor() const { return anchor_; }
    /// D^3 g(anchor)[e_i] for each coordinate i.
    const std::vector<Matrix>& tensor() const { return tensor_; }

  private:
    Vector cubic_action(const Vector& s) const;  // D^3 g(anchor)[s, s]
    Matrix cubic_matrix(const Vector& s) const;  // D^3 g(anchor)[s]

    Vector anchor_;
    double reg_;
    double f0_;
    Vector g0_;
    Matrix h0_;
    std::vector<Matrix> tensor_;
    std::string g_name_;
};

/// f = g + h with L_3(g) <= L_3(h). Each part is wrapped in its own counter.
struct CompositeProblem {
    std::shared_ptr<CountedOracle> g;
    std::shared_ptr<CountedOracle> h;
    bool swapped = false;  ///< g and h were exchanged to restore L_3(g) <= L_3(h)

    /// Swaps the parts (with a warning on stderr) if L_3(g) > L_3(h), unless h is zero.
    CompositeProblem(OraclePtr g_part, OraclePtr h_part);

    Eigen::Index dim() const { return g->dim(); }
    double value(const VectorRef& x) const;
    Vector gradient(const VectorRef& x) const;
    ComponentCounts counts() const;
};

/// |grad m_g(T) + grad h(T)| <= (1/6)|grad g(T) + grad h(T)|, with m_g the
/// regularized model of g (H = 3 L_3(g) / 2) at the anchor.
Membership composite_membership(const CompositeProblem& prob, const ModelSpec& g_model, const VectorRef& point);
Membership composite_membership(const CompositeProblem& prob, const VectorRef& anchor, const VectorRef& point);

struct SlidingConfig {
    NatmiConfig outer;   ///< window and model use L_3(g)
    NatmiConfig middle;  ///< solves min_y m_g(y) + h(y); window and inner model use 4 H_g + L_3(h)
    SlidingConfig() { middle.max_iters = 200; }
};

struct SlidingCounts {
    std::uint64_t hess_g = 0;
    std::uint64_t hess_h = 0;
    std::uint64_t grad_g = 0;
    std::uint64_t grad_h = 0;
};

struct SlidingResult {
    Vector y;
    Trace trace;
    std::vector<StepInfo> steps;
    SlidingCounts counts;
    int middle_iters = 0;  ///< total middle-level iterations
};

/// Composite accelerated method with the middle level below it. With h
/// identically zero the middle level is skipped and the subproblem goes to the
/// inner method directly, reproducing the plain method on g.
SlidingResult solve_composite_natmi(const CompositeProblem& prob, const VectorRef& x0, const SlidingConfig& cfg,
                                    const TraceCallback& on_row = {});

/// Three-level sliding: outer composite loop on (g, h), middle composite loop on
/// (m_g, h), inner gradient-based solver on the sum of both models.
SlidingResult solve_sliding(const CompositeProblem& prob, const VectorRef& x0, const SlidingConfig& cfg,
                            const TraceCallback& on_row = {});

}  // namespace hyperfast
