#pragma once

// Parameter containers for the hidden-process regression mixture and the
// baseline polynomial regression mixture, plus the EM fit report. Models
// validate their invariants on construction and are immutable afterwards.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "regclust/gating.hpp"
#include "regclust/types.hpp"

namespace regclust {

class HprMixtureModel {
public:
    /// `coefficients[k]` is (p+1) x L with one column per regime;
    /// `variances` is K x L and must respect the structure's variance mode.
    HprMixtureModel(ModelStructure structure, TimeScaling scaling, Eigen::VectorXd proportions,
                    std::vector<GatingParameters> gating, std::vector<Eigen::MatrixXd> coefficients,
                    Eigen::MatrixXd variances);

    const ModelStructure& structure() const { return structure_; }
    const TimeScaling& scaling() const { return scaling_; }
    int clusters() const { return structure_.clusters; }
    int segments() const { return structure_.segments; }
    int degree() const { return structure_.degree; }

    const Eigen::VectorXd& proportions() const { return proportions_; }
    const GatingParameters& gating(int k) const { return gating_[static_cast<std::size_t>(k)]; }
    const std::vector<GatingParameters>& gating() const { return gating_; }
    const Eigen::MatrixXd& coefficients(int k) const {
        return coefficients_[static_cast<std::size_t>(k)];
    }
    const std::vector<Eigen::MatrixXd>& coefficients() const { return coefficients_; }
    Eigen::VectorXd beta(int k, int l) const { return coefficients(k).col(l); }
    double variance(int k, int l) const { return variances_(k, l); }
    const Eigen::MatrixXd& variances() const { return variances_; }

    /// The scalars the EM actually optimises, without constraint duplicates:
    /// K-1 proportions, unpinned gating entries (once if shared), all
    /// coefficients, and one variance per free variance slot.
    std::vector<double> free_parameters() const;

private:
    ModelStructure structure_;
    TimeScaling scaling_;
    Eigen::VectorXd proportions_;
    std::vector<GatingParameters> gating_;
    std::vector<Eigen::MatrixXd> coefficients_;
    Eigen::MatrixXd variances_;
};

class RegMixtureModel {
public:
    /// `coefficients` is (p+1) x K, one column per cluster.
    RegMixtureModel(int degree, TimeScaling scaling, Eigen::VectorXd proportions,
                    Eigen::MatrixXd coefficients, Eigen::VectorXd variances);

    int clusters() const { return static_cast<int>(proportions_.size()); }
    int degree() const { return degree_; }
    const TimeScaling& scaling() const { return scaling_; }
    const Eigen::VectorXd& proportions() const { return proportions_; }
    const Eigen::MatrixXd& coefficients() const { return coefficients_; }
    Eigen::VectorXd beta(int k) const { return coefficients_.col(k); }
    const Eigen::VectorXd& variances() const { return variances_; }
    double variance(int k) const { return variances_[k]; }

    std::vector<double> free_parameters() const;

private:
    int degree_;
    TimeScaling scaling_;
    Eigen::VectorXd proportions_;
    Eigen::MatrixXd coefficients_;
    Eigen::VectorXd variances_;
};

/// Same likelihood as the baseline: one regime per cluster.
HprMixtureModel to_hpr_model(const RegMixtureModel& model);

/// E-step output. `lambda[k * L + l]` is the n x m matrix of joint
/// point posteriors for cluster k, regime l.
struct Posteriors {
    Eigen::MatrixXd r;
    std::vector<Eigen::MatrixXd> lambda;
    int segments = 1;
    double log_likelihood = 0.0;

    const Eigen::MatrixXd& lambda_block(int k, int l) const {
        return lambda[static_cast<std::size_t>(k * segments + l)];
    }
    double lambda_at(Eigen::Index i, Eigen::Index j, int k, int l) const {
        return lambda_block(k, l)(i, j);
    }
};

struct RestartOutcome {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct EmFitReport {
    double final_log_likelihood = 0.0;
    std::vector<double> loglik_trace;
    int iterations = 0;
    bool converged = false;
    /// n x K.
    Eigen::MatrixXd posteriors_r;
    /// Empty for the baseline mixture; see Posteriors::lambda for layout.
    std::vector<Eigen::MatrixXd> posteriors_lambda;
    int restart_index = 0;
    std::vector<RestartOutcome> restarts;
    std::vector<std::string> warnings;
};

}  // namespace regclust
