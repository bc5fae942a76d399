#include "regclust/random.hpp"

#include <numeric>

#include "regclust/errors.hpp"

namespace regclust {

std::vector<int> draw_distinct(int population, int count, Rng& rng) {
    if (count > population || count < 0) {
        throw Error(ErrorCode::InvalidStructure, "cannot draw " + std::to_string(count) +
                                                     " distinct series from " +
                                                     std::to_string(population));
    }
    std::vector<int> pool(static_cast<std::size_t>(population));
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates.
    for (int i = 0; i < count; ++i) {
        std::uniform_int_distribution<int> pick(i, population - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

}  // namespace regclust
