#pragma once

// Baseline mixture of polynomial regressions: each cluster is one polynomial
// mean curve with isotropic Gaussian noise over the whole series.

#include <Eigen/Dense>

#include <cstdint>

#include "regclust/design.hpp"
#include "regclust/em.hpp"
#include "regclust/models.hpp"

namespace regclust {

struct RegMixFit {
    RegMixtureModel model;
    EmFitReport report;
};

/// log sum_k pi_k N(x; T beta_k, sigma2_k I), evaluated in log space.
/// `design` must be built on the model's scaled time.
double regmix_log_density(const RegMixtureModel& model, const Eigen::VectorXd& series,
                          const DesignMatrix& design);

double regmix_log_likelihood(const RegMixtureModel& model, const TimeSeriesDataset& data);

/// n x K cluster posteriors; rows sum to one.
Eigen::MatrixXd regmix_posteriors(const RegMixtureModel& model, const TimeSeriesDataset& data);

/// Cluster mean curves T beta_k on the data grid, K x m.
Eigen::MatrixXd regmix_mean_series(const RegMixtureModel& model, const TimeGrid& grid);

/// Degree-p OLS on K distinct randomly drawn series; pi = 1/K; variance is
/// the per-series residual variance, floored.
RegMixtureModel regmix_initialize(const TimeSeriesDataset& data, int clusters, int degree,
                                  std::uint64_t seed, const TimeScaling& scaling);

/// One EM run from `init`. Throws EmptyComponent if a cluster loses its mass.
RegMixFit regmix_run_em(const TimeSeriesDataset& data, const RegMixtureModel& init,
                        const EmOptions& options);

/// Best of `options.restarts` runs by final log-likelihood.
RegMixFit regmix_fit_em(const TimeSeriesDataset& data, int clusters, int degree,
                        const EmOptions& options);

}  // namespace regclust
