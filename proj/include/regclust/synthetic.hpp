#pragma once

// Labeled synthetic series drawn from a mixture of clusters whose mean curves
// are either one polynomial or several polynomials blended by logistic gates.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "regclust/gating.hpp"
#include "regclust/types.hpp"

namespace regclust {

struct ClusterSpec {
    /// (p+1) x L; one column per regime. A plain cluster has L = 1.
    Eigen::MatrixXd coefficients;
    /// Required when L > 1.
    std::optional<GatingParameters> gating;
    /// Noise variances: one shared value or one per regime. Zero is allowed.
    Eigen::VectorXd variances;
    /// Time axis on which coefficients and gating are expressed.
    TimeScaling time_map;

    int regimes() const { return static_cast<int>(coefficients.cols()); }
};

enum class GenerationMode {
    /// x_ij = c_kj + noise, with c_k the gate-weighted mean curve.
    DeterministicMean,
    /// Each point draws its regime from the gates, then x_ij = T_j beta_kl + noise.
    PerPointRegime,
};

struct GenerativeSpec {
    int n = 50;
    TimeGrid grid = TimeGrid::regular(1.0, 1.0, 60);
    std::vector<ClusterSpec> clusters;
    Eigen::VectorXd proportions;
    std::uint64_t seed = 1;
    GenerationMode mode = GenerationMode::DeterministicMean;

    /// Throws InvalidSpec.
    void validate() const;
};

struct SyntheticSample {
    /// Carries the 1-based true labels.
    TimeSeriesDataset data;
    /// n x m, 1-based regime per point: drawn in per-point mode, the
    /// dominant gate in deterministic-mean mode.
    std::vector<std::vector<int>> regimes;
};

/// Series i uses its own stream derive_seed(seed, i), so every series is
/// reproducible on its own and independent of generation order.
SyntheticSample generate(const GenerativeSpec& spec);

/// Gate-weighted mean curve of one cluster on `grid`.
Eigen::VectorXd cluster_mean_curve(const ClusterSpec& cluster, const TimeGrid& grid);

/// Two-cluster benchmark: a three-level staircase (levels 10, 20, 30 with
/// logistic transitions) and a degree-8 polynomial, n = 50 on t = 1..60,
/// equal proportions and noise variance `sigma2` everywhere.
GenerativeSpec table1_spec(double sigma2, std::uint64_t seed = 1);

}  // namespace regclust
