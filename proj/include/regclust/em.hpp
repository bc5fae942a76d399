#pragma once

#include <cstdint>

#include "regclust/types.hpp"

namespace regclust {

/// Settings shared by both EM fitters.
struct EmOptions {
    int restarts = 20;
    int max_iters = 500;
    /// Stop once the relative log-likelihood gain drops below this.
    double tol = 1e-8;
    std::uint64_t seed = 1;
    /// Fit on time mapped affinely onto [0, 1].
    bool normalize_time = true;
    /// Worker cap for restarts; 0 uses every hardware thread.
    int threads = 0;
    int irls_max_iters = 100;
    double irls_gradient_tolerance = 1e-6;

    TimeScaling scaling_for(const TimeGrid& grid) const {
        return normalize_time ? TimeScaling::unit_interval(grid) : TimeScaling::identity();
    }
    void validate() const;
};

}  // namespace regclust
