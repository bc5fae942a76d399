#pragma once

// Mixture of hidden-process regression models.
//
// Each cluster k owns L polynomial regimes. At time t the regime of a point
// is drawn from softmax proportions pi_kl(t; alpha_k), so a cluster's series
// follow a per-point Gaussian mixture whose weights drift smoothly over time.
// Fitting is by EM: the E-step computes series-to-cluster posteriors r_ik and
// point-to-(cluster, regime) posteriors lambda_ijkl; the M-step updates the
// proportions in closed form, the gating by IRLS and the regressions by
// weighted least squares.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regclust/design.hpp"
#include "regclust/em.hpp"
#include "regclust/models.hpp"

namespace regclust {

struct HprFit {
    HprMixtureModel model;
    EmFitReport report;
};

/// log f_k(x | t) = sum_j log sum_l pi_kl(t_j) N(x_j; T_j beta_kl, sigma2_kl).
double component_log_density(const HprMixtureModel& model, int k, const Eigen::VectorXd& series,
                             const TimeGrid& grid);

double observed_log_likelihood(const HprMixtureModel& model, const TimeSeriesDataset& data);

Posteriors e_step(const HprMixtureModel& model, const TimeSeriesDataset& data);

struct MStepResult {
    HprMixtureModel model;
    std::vector<std::string> warnings;
    bool gating_damped = false;
    bool gating_saturated = false;
};

/// One M-step. Structure, time scaling and the IRLS warm start come from
/// `previous`. Throws EmptyComponent when a cluster's posterior mass falls
/// below 1e-10 n.
MStepResult m_step(const Posteriors& posteriors, const TimeSeriesDataset& data,
                   const HprMixtureModel& previous, int irls_max_iters = 100,
                   double irls_gradient_tolerance = 1e-6);

/// The three separable parts of the expected complete-data log-likelihood
/// Q(theta, theta_q) for fixed posteriors.
struct ExpectedLogLikelihood {
    double proportions = 0.0;
    double gating = 0.0;
    double regression = 0.0;
    double total() const { return proportions + gating + regression; }
};

ExpectedLogLikelihood expected_complete_log_likelihood(const HprMixtureModel& model,
                                                       const Posteriors& posteriors,
                                                       const TimeSeriesDataset& data);

/// K distinct random series, each cut into L equal contiguous segments (the
/// last absorbs the remainder) with a degree-p OLS fit per segment. Gating
/// starts at zero, proportions at 1/K. Throws InsufficientSegmentLength when
/// floor(m / L) < p + 1.
HprMixtureModel hpr_initialize(const TimeSeriesDataset& data, const ModelStructure& structure,
                               std::uint64_t seed, const TimeScaling& scaling);

/// One EM run from `init`.
HprFit hpr_run_em(const TimeSeriesDataset& data, const HprMixtureModel& init,
                  const EmOptions& options);

/// Best of `options.restarts` independent runs. Restarts whose clusters
/// collapse are recorded as failed; AllRestartsFailed if none survive.
HprFit hpr_fit_em(const TimeSeriesDataset& data, const ModelStructure& structure,
                  const EmOptions& options);

/// 1-based MAP labels; ties go to the lowest cluster index.
std::vector<int> map_partition(const Eigen::MatrixXd& r);

/// Gate-weighted mean curve of cluster k on `grid`.
Eigen::VectorXd mean_series(const HprMixtureModel& model, int k, const TimeGrid& grid);
/// All clusters, K x m.
Eigen::MatrixXd mean_series(const HprMixtureModel& model, const TimeGrid& grid);

/// Regime l's polynomial T beta_kl on `grid` (no gating).
Eigen::VectorXd regime_curve(const HprMixtureModel& model, int k, int l, const TimeGrid& grid);

struct Segmentation {
    /// Per regime, the inclusive 0-based grid index range where it has the
    /// largest proportion, or nothing if it never wins.
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> intervals;
    /// Winning regime at each grid point (0-based).
    std::vector<int> regime_at;

    int regime_changes() const;
};

/// Argmax-gate segmentation of cluster k (lowest index wins ties). Throws
/// ContiguityViolation if some regime wins on a non-contiguous index set.
Segmentation segment(const HprMixtureModel& model, int k, const TimeGrid& grid);

}  // namespace regclust
