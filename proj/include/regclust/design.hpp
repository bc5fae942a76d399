#pragma once

#include <Eigen/Dense>

#include "regclust/types.hpp"

namespace regclust {

/// Vandermonde design: row j is (1, t_j, ..., t_j^p).
class DesignMatrix {
public:
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    int degree() const { return static_cast<int>(matrix_.cols()) - 1; }
    Eigen::Index rows() const { return matrix_.rows(); }
    Eigen::Index cols() const { return matrix_.cols(); }
    auto row(Eigen::Index j) const { return matrix_.row(j); }

private:
    friend DesignMatrix build_design(const Eigen::VectorXd& times, int degree);
    explicit DesignMatrix(Eigen::MatrixXd m) : matrix_(std::move(m)) {}

    Eigen::MatrixXd matrix_;
};

/// Powers of `times` up to `degree`. Throws DegreeTooLargeForGrid when
/// degree + 1 exceeds the number of time points.
DesignMatrix build_design(const Eigen::VectorXd& times, int degree);

/// Design over the grid after applying `scaling`.
DesignMatrix build_design(const TimeGrid& grid, int degree,
                          const TimeScaling& scaling = TimeScaling::identity());

/// T * beta. Throws DimensionMismatch when beta has the wrong length.
Eigen::VectorXd predict_polynomial(const DesignMatrix& design, const Eigen::VectorXd& beta);

struct WlsSolution {
    Eigen::VectorXd beta;
    /// Set when the weighted design was rank deficient and a ridge term was
    /// added to the normal equations.
    bool ridge_applied = false;
};

/// Minimises sum_j w_j (y_j - T_j beta)^2 with a column-pivoted QR of the
/// row-scaled design. Falls back to ridge-regularised normal equations
/// (jitter 1e-10 x mean diagonal) if the weighted design is rank deficient.
WlsSolution weighted_least_squares(const DesignMatrix& design, const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& targets);

/// Ordinary least squares: unit weights.
WlsSolution least_squares(const DesignMatrix& design, const Eigen::VectorXd& targets);

}  // namespace regclust
