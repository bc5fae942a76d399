#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace regclust {

/// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`. Depends only on the pair, so
/// restart r always sees the same stream whatever else runs.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

/// `count` distinct indices drawn uniformly from [0, population), in draw order.
std::vector<int> draw_distinct(int population, int count, Rng& rng);

}  // namespace regclust
