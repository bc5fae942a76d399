#include "regclust/design.hpp"

#include <cmath>

namespace regclust {

DesignMatrix build_design(const Eigen::VectorXd& times, int degree) {
    if (degree < 0) {
        throw Error(ErrorCode::InvalidStructure, "polynomial degree must be >= 0");
    }
    const Eigen::Index m = times.size();
    if (degree + 1 > m) {
        throw Error(ErrorCode::DegreeTooLargeForGrid,
                    "degree " + std::to_string(degree) + " needs at least " +
                        std::to_string(degree + 1) + " time points, grid has " + std::to_string(m));
    }
    Eigen::MatrixXd t(m, degree + 1);
    t.col(0).setOnes();
    for (int u = 1; u <= degree; ++u) {
        t.col(u) = t.col(u - 1).cwiseProduct(times);
    }
    return DesignMatrix(std::move(t));
}

DesignMatrix build_design(const TimeGrid& grid, int degree, const TimeScaling& scaling) {
    return build_design(scaling.apply(grid.values()), degree);
}

Eigen::VectorXd predict_polynomial(const DesignMatrix& design, const Eigen::VectorXd& beta) {
    if (beta.size() != design.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "coefficient vector has " + std::to_string(beta.size()) + " entries, design has " +
                        std::to_string(design.cols()) + " columns");
    }
    return design.matrix() * beta;
}

WlsSolution weighted_least_squares(const DesignMatrix& design, const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& targets) {
    const auto& t = design.matrix();
    if (weights.size() != t.rows() || targets.size() != t.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "weights/targets do not match the design rows");
    }
    const Eigen::VectorXd root = weights.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd a = root.asDiagonal() * t;
    const Eigen::VectorXd b = root.cwiseProduct(targets);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() == t.cols()) {
        return {qr.solve(b), false};
    }

    Eigen::MatrixXd normal = a.transpose() * a;
    const double mean_diag = normal.trace() / static_cast<double>(t.cols());
    const double jitter = 1e-10 * (mean_diag > 0.0 ? mean_diag : 1.0);
    normal.diagonal().array() += jitter;
    return {normal.ldlt().solve(a.transpose() * b), true};
}

WlsSolution least_squares(const DesignMatrix& design, const Eigen::VectorXd& targets) {
    return weighted_least_squares(design, Eigen::VectorXd::Ones(design.rows()), targets);
}

}  // namespace regclust
