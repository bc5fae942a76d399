#include "regclust/gating.hpp"

#include <algorithm>
#include <cmath>

namespace regclust {

GatingParameters::GatingParameters(Eigen::MatrixXd coefficients)
    : coefficients_(std::move(coefficients)) {
    if (coefficients_.rows() < 1 || coefficients_.cols() != 2) {
        throw Error(ErrorCode::InvalidModel, "gating parameters must be an L x 2 matrix");
    }
    if (!coefficients_.allFinite()) {
        throw Error(ErrorCode::NonFiniteValue, "gating parameters must be finite");
    }
    if (!coefficients_.row(coefficients_.rows() - 1).isZero(0.0)) {
        throw Error(ErrorCode::InvalidModel, "reference regime gating must be pinned to (0, 0)");
    }
}

GatingParameters GatingParameters::zeros(int regimes) {
    return GatingParameters(Eigen::MatrixXd::Zero(regimes, 2));
}

GatingParameters GatingParameters::from_free(int regimes, const Eigen::VectorXd& free) {
    if (free.size() != 2 * (regimes - 1)) {
        throw Error(ErrorCode::DimensionMismatch, "free gating vector has the wrong length");
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(regimes, 2);
    for (int l = 0; l + 1 < regimes; ++l) {
        c(l, 0) = free[2 * l];
        c(l, 1) = free[2 * l + 1];
    }
    return GatingParameters(std::move(c));
}

Eigen::VectorXd GatingParameters::free_vector() const {
    Eigen::VectorXd v(2 * (regimes() - 1));
    for (int l = 0; l + 1 < regimes(); ++l) {
        v[2 * l] = coefficients_(l, 0);
        v[2 * l + 1] = coefficients_(l, 1);
    }
    return v;
}

Eigen::VectorXd log_logistic_proportions(const GatingParameters& alpha, double t) {
    const auto& c = alpha.coefficients();
    Eigen::VectorXd s = c.col(0) + t * c.col(1);
    const double top = s.maxCoeff();
    const double lse = top + std::log((s.array() - top).exp().sum());
    return (s.array() - lse).matrix();
}

Eigen::VectorXd logistic_proportions(const GatingParameters& alpha, double t) {
    const auto& c = alpha.coefficients();
    Eigen::VectorXd s = c.col(0) + t * c.col(1);
    const Eigen::ArrayXd e = (s.array() - s.maxCoeff()).exp();
    return (e / e.sum()).matrix();
}

Eigen::MatrixXd log_logistic_proportions(const GatingParameters& alpha,
                                         const Eigen::VectorXd& times) {
    Eigen::MatrixXd out(times.size(), alpha.regimes());
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        out.row(j) = log_logistic_proportions(alpha, times[j]).transpose();
    }
    return out;
}

Eigen::MatrixXd logistic_proportions(const GatingParameters& alpha, const Eigen::VectorXd& times) {
    Eigen::MatrixXd out(times.size(), alpha.regimes());
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        out.row(j) = logistic_proportions(alpha, times[j]).transpose();
    }
    return out;
}

IrlsProblem IrlsProblem::from_series_weights(const Eigen::VectorXd& times,
                                             const std::vector<Eigen::MatrixXd>& per_regime) {
    IrlsProblem p;
    p.times = times;
    p.weights.resize(times.size(), static_cast<Eigen::Index>(per_regime.size()));
    for (std::size_t l = 0; l < per_regime.size(); ++l) {
        if (per_regime[l].cols() != times.size()) {
            throw Error(ErrorCode::DimensionMismatch, "weight matrix width != grid length");
        }
        p.weights.col(static_cast<Eigen::Index>(l)) = per_regime[l].colwise().sum().transpose();
    }
    return p;
}

void IrlsProblem::validate() const {
    if (weights.rows() != times.size() || weights.cols() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "IRLS weights must be m x L");
    }
    if (!weights.allFinite() || (weights.array() < 0.0).any()) {
        throw Error(ErrorCode::NonFiniteObjective, "IRLS weights must be finite and nonnegative");
    }
}

double gating_objective(const GatingParameters& alpha, const IrlsProblem& problem) {
    double q = 0.0;
    for (Eigen::Index j = 0; j < problem.times.size(); ++j) {
        const Eigen::VectorXd logp = log_logistic_proportions(alpha, problem.times[j]);
        for (Eigen::Index l = 0; l < logp.size(); ++l) {
            const double w = problem.weights(j, l);
            if (w != 0.0) q += w * logp[l];
        }
    }
    return q;
}

Eigen::VectorXd gating_gradient(const GatingParameters& alpha, const IrlsProblem& problem) {
    const int free_regimes = alpha.regimes() - 1;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * free_regimes);
    for (Eigen::Index j = 0; j < problem.times.size(); ++j) {
        const double t = problem.times[j];
        const Eigen::VectorXd pi = logistic_proportions(alpha, t);
        const double total = problem.weights.row(j).sum();
        for (int l = 0; l < free_regimes; ++l) {
            const double r = problem.weights(j, l) - total * pi[l];
            g[2 * l] += r;
            g[2 * l + 1] += r * t;
        }
    }
    return g;
}

Eigen::MatrixXd gating_hessian(const GatingParameters& alpha, const IrlsProblem& problem) {
    const int free_regimes = alpha.regimes() - 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * free_regimes, 2 * free_regimes);
    for (Eigen::Index j = 0; j < problem.times.size(); ++j) {
        const double t = problem.times[j];
        const Eigen::VectorXd pi = logistic_proportions(alpha, t);
        const double total = problem.weights.row(j).sum();
        if (total == 0.0) continue;
        const double x[2] = {1.0, t};
        for (int l = 0; l < free_regimes; ++l) {
            for (int k = 0; k < free_regimes; ++k) {
                const double c = total * pi[l] * ((l == k ? 1.0 : 0.0) - pi[k]);
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        h(2 * l + a, 2 * k + b) -= c * x[a] * x[b];
                    }
                }
            }
        }
    }
    return h;
}

namespace {

// Solves (-H + tau I) d = g, raising tau until the factorization is positive
// definite. Returns true when damping had to be applied.
bool newton_direction(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient,
                      Eigen::VectorXd& direction) {
    const Eigen::MatrixXd a = -hessian;
    const double scale = std::max(std::abs(a.trace()), 1e-300);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
        if (d.minCoeff() > 1e-12 * std::sqrt(scale)) {
            direction = llt.solve(gradient);
            if (direction.allFinite()) return false;
        }
    }
    double tau = 1e-6 * scale;
    for (int attempt = 0; attempt < 60; ++attempt, tau *= 10.0) {
        Eigen::MatrixXd damped = a;
        damped.diagonal().array() += tau;
        Eigen::LLT<Eigen::MatrixXd> dl(damped);
        if (dl.info() == Eigen::Success) {
            direction = dl.solve(gradient);
            if (direction.allFinite()) return true;
        }
    }
    direction = gradient / scale;
    return true;
}

}  // namespace

IrlsResult irls_fit(const IrlsProblem& problem, const GatingParameters& init,
                    const IrlsOptions& options) {
    problem.validate();
    if (problem.regimes() != init.regimes()) {
        throw Error(ErrorCode::DimensionMismatch, "initial gating has the wrong regime count");
    }
    IrlsResult result{init, 0, 0.0, 0.0, {}, false, false, false};
    result.objective = gating_objective(init, problem);
    if (!std::isfinite(result.objective)) {
        throw Error(ErrorCode::NonFiniteObjective, "gating objective is not finite at the start");
    }
    result.objective_trace.push_back(result.objective);
    const int regimes = init.regimes();
    if (regimes == 1) {
        result.converged = true;
        return result;
    }

    Eigen::VectorXd alpha = init.free_vector();
    Eigen::VectorXd gradient = gating_gradient(init, problem);
    for (int it = 0; it < options.max_iters; ++it) {
        result.gradient_norm = gradient.lpNorm<Eigen::Infinity>();
        if (result.gradient_norm < options.gradient_tolerance) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd direction;
        const auto current = GatingParameters::from_free(regimes, alpha);
        if (newton_direction(gating_hessian(current, problem), gradient, direction)) {
            result.damped = true;
        }

        double step = 1.0;
        bool accepted = false;
        bool clamped = false;
        Eigen::VectorXd candidate;
        double q_candidate = 0.0;
        for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
            candidate = alpha + step * direction;
            clamped = (candidate.array().abs() > options.alpha_cap).any();
            candidate = candidate.cwiseMax(-options.alpha_cap).cwiseMin(options.alpha_cap);
            q_candidate = gating_objective(GatingParameters::from_free(regimes, candidate), problem);
            if (!std::isfinite(q_candidate)) continue;
            if (q_candidate >= result.objective) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        const double gain = q_candidate - result.objective;
        alpha = candidate;
        result.objective = q_candidate;
        result.objective_trace.push_back(q_candidate);
        result.iterations = it + 1;
        const auto next = GatingParameters::from_free(regimes, alpha);
        gradient = gating_gradient(next, problem);
        if (clamped) {
            result.saturated = true;
            break;
        }
        if (gain <= 1e-13 * std::max(1.0, std::abs(result.objective))) {
            // Flat: separable weights push alpha outward without changing Q.
            break;
        }
    }
    result.params = GatingParameters::from_free(regimes, alpha);
    result.gradient_norm = gradient.lpNorm<Eigen::Infinity>();
    result.converged = result.converged || result.gradient_norm < options.gradient_tolerance;
    return result;
}

}  // namespace regclust
