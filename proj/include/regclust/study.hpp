#pragma once
// Comparison protocol shared by the CLI and the acceptance suite: fit the
// hidden-process mixture and the baseline on one labeled dataset and score
// both partitions against the truth.
#include <cstdint>
#include <vector>

#include "regclust/em.hpp"
#include "regclust/types.hpp"

namespace regclust {

struct MethodScore {
    double misclassification_pct = 0.0;
    double inertia = 0.0;
    double log_likelihood = 0.0;
    bool converged = false;
};

struct Comparison {
    MethodScore proposed;
    MethodScore baseline;
};

/// Needs true labels (MissingLabels otherwise).
Comparison compare_methods(const TimeSeriesDataset& data, const ModelStructure& proposed,
                           int baseline_degree, const EmOptions& options);

/// Seed of replicate r in a study driven by `master`.
std::uint64_t replicate_seed(std::uint64_t master, int replicate);

/// Averages of a set of comparisons.
Comparison average(const std::vector<Comparison>& runs);

}  // namespace regclust
