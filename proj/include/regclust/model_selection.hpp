#pragma once

// BIC model selection over (K, L, p) for the hidden-process mixture and over
// (K, p) for the baseline regression mixture.

#include <cstddef>
#include <string>
#include <vector>

#include "regclust/em.hpp"
#include "regclust/types.hpp"

namespace regclust {

/// Free scalars: (K-1) + 2K(L-1) + LK(p+1) + LK for the unconstrained model.
/// Shared gating counts 2(L-1) gating scalars; per-cluster variances count K
/// and a global variance counts 1.
int free_parameter_count(const ModelStructure& structure);

/// (K-1) + K(p+1) + K.
int regmix_free_parameter_count(int clusters, int degree);

/// loglik - nu/2 * log(sample_size). Larger is better.
double bic(double log_likelihood, int free_parameters, std::size_t sample_size);

struct IntRange {
    int min = 1;
    int max = 1;
    bool contains(int v) const { return v >= min && v <= max; }
};

enum class PenaltySize {
    Series,       // n, the default
    Observations  // n * m, for sensitivity checks
};

struct SelectionGrid {
    IntRange clusters{1, 1};
    IntRange segments{1, 1};
    IntRange degrees{0, 0};
    VarianceMode variance_mode = VarianceMode::Free;
    GatingMode gating_mode = GatingMode::PerCluster;
    PenaltySize penalty = PenaltySize::Series;

    void validate() const;
};

struct SelectionCell {
    ModelStructure structure;
    /// False when floor(m / L) < p + 1; the cell is skipped.
    bool feasible = true;
    /// False when the cell was skipped or every restart failed.
    bool fitted = false;
    std::string note;
    double log_likelihood = 0.0;
    int parameters = 0;
    double bic = 0.0;
    bool converged = false;
};

struct SelectionReport {
    bool baseline = false;
    std::vector<SelectionCell> cells;
    std::size_t winner = 0;
    std::vector<std::string> warnings;

    const SelectionCell& best() const { return cells.at(winner); }
};

/// Fits the hidden-process mixture at every cell (best of options.restarts,
/// same seeds in every cell) and picks the highest BIC among converged cells.
/// Throws NoFeasibleCell if nothing could be fitted.
SelectionReport select(const TimeSeriesDataset& data, const SelectionGrid& grid,
                       const EmOptions& options);

/// Baseline regression mixture over grid.clusters x grid.degrees; segments
/// and the constraint modes are ignored.
SelectionReport select_regmix(const TimeSeriesDataset& data, const SelectionGrid& grid,
                              const EmOptions& options);

}  // namespace regclust
