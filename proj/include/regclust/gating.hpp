#pragma once

// Time-dependent softmax regime proportions and the Newton-Raphson (IRLS)
// solver for the weighted multinomial logistic objective of the M-step.
//
// Regime L (the last one) is the reference: its intercept and slope are
// pinned to zero, so the free parameter vector has 2(L-1) entries ordered
// (a_1,0, a_1,1, a_2,0, a_2,1, ...).

#include <Eigen/Dense>

#include <vector>

#include "regclust/types.hpp"

namespace regclust {

class GatingParameters {
public:
    /// L x 2 matrix of (intercept, slope) rows. The last row must be zero.
    explicit GatingParameters(Eigen::MatrixXd coefficients);

    /// All-zero gating: uniform proportions at every time.
    static GatingParameters zeros(int regimes);
    /// Rebuild from the 2(L-1) free entries.
    static GatingParameters from_free(int regimes, const Eigen::VectorXd& free);

    int regimes() const { return static_cast<int>(coefficients_.rows()); }
    double intercept(int regime) const { return coefficients_(regime, 0); }
    double slope(int regime) const { return coefficients_(regime, 1); }
    const Eigen::MatrixXd& coefficients() const { return coefficients_; }
    Eigen::VectorXd free_vector() const;

    bool operator==(const GatingParameters& other) const {
        return coefficients_ == other.coefficients_;
    }

private:
    Eigen::MatrixXd coefficients_;
};

/// Softmax over regimes of intercept + slope * t. Uses max-subtraction so
/// slopes of order 1e3 do not overflow.
Eigen::VectorXd logistic_proportions(const GatingParameters& alpha, double t);
Eigen::VectorXd log_logistic_proportions(const GatingParameters& alpha, double t);

/// m x L matrix of proportions at each time point.
Eigen::MatrixXd logistic_proportions(const GatingParameters& alpha, const Eigen::VectorXd& times);
Eigen::MatrixXd log_logistic_proportions(const GatingParameters& alpha,
                                         const Eigen::VectorXd& times);

/// Weighted logistic regression problem. Because the objective is linear in
/// the weights, per-series posterior weights are summed over series into an
/// m x L matrix up front.
struct IrlsProblem {
    Eigen::VectorXd times;
    Eigen::MatrixXd weights;

    /// Sums per-series weights; `per_regime[l]` is n x m.
    static IrlsProblem from_series_weights(const Eigen::VectorXd& times,
                                           const std::vector<Eigen::MatrixXd>& per_regime);
    int regimes() const { return static_cast<int>(weights.cols()); }
    /// Throws DimensionMismatch or NonFiniteObjective on malformed weights.
    void validate() const;
};

/// sum_j sum_l W_jl log pi_l(t_j).
double gating_objective(const GatingParameters& alpha, const IrlsProblem& problem);

/// Gradient with respect to the free parameters:
/// sum_j (W_jl - W_j. pi_l(t_j)) (1, t_j) for l < L.
Eigen::VectorXd gating_gradient(const GatingParameters& alpha, const IrlsProblem& problem);

/// Hessian with respect to the free parameters (negative semi-definite).
Eigen::MatrixXd gating_hessian(const GatingParameters& alpha, const IrlsProblem& problem);

struct IrlsOptions {
    int max_iters = 100;
    double gradient_tolerance = 1e-6;
    int max_halvings = 30;
    /// Bound on |free entries|; reaching it flags a step-like transition.
    double alpha_cap = 1e6;
};

struct IrlsResult {
    GatingParameters params;
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;
    std::vector<double> objective_trace;
    bool converged = false;
    /// Levenberg damping was needed because the Hessian was singular.
    bool damped = false;
    /// Some entry hit the alpha cap.
    bool saturated = false;
};

/// Damped Newton ascent with step halving. Every accepted step does not
/// decrease the objective, so the result is never worse than `init`.
IrlsResult irls_fit(const IrlsProblem& problem, const GatingParameters& init,
                    const IrlsOptions& options = {});

}  // namespace regclust
