#pragma once

#include <Eigen/Dense>

#include <span>

#include "regclust/types.hpp"

namespace regclust {

/// Percentage of series whose predicted label disagrees with the truth under
/// the best one-to-one relabeling of the prediction. Exact over all K!
/// relabelings for K <= 8, greedy confusion matching above. Labels are
/// 1-based; anything outside 1..K throws LabelOutOfRange.
double misclassification_pct(std::span<const int> truth, std::span<const int> predicted,
                             int clusters);

/// sum_i || x_i - c_{z_i} ||^2 with 1-based `partition` and K x m `means`.
double intra_cluster_inertia(const TimeSeriesDataset& data, std::span<const int> partition,
                             const Eigen::MatrixXd& means);

/// Two-decimal rounding used when reporting percentages.
double round_percentage(double pct);

}  // namespace regclust
