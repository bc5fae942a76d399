#include "regclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace regclust {

double misclassification_pct(std::span<const int> truth, std::span<const int> predicted,
                             int clusters) {
    if (truth.size() != predicted.size()) {
        throw Error(ErrorCode::DimensionMismatch, "label vectors differ in length");
    }
    if (clusters < 1) throw Error(ErrorCode::LabelOutOfRange, "K must be >= 1");
    if (truth.empty()) return 0.0;
    const auto k = static_cast<std::size_t>(clusters);
    std::vector<std::vector<long>> confusion(k, std::vector<long>(k, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 1 || truth[i] > clusters || predicted[i] < 1 || predicted[i] > clusters) {
            throw Error(ErrorCode::LabelOutOfRange,
                        "label at position " + std::to_string(i + 1) + " outside 1.." +
                            std::to_string(clusters));
        }
        ++confusion[static_cast<std::size_t>(predicted[i] - 1)][static_cast<std::size_t>(truth[i] - 1)];
    }

    long matched = 0;
    if (k <= 8) {
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            long agree = 0;
            for (std::size_t p = 0; p < k; ++p) agree += confusion[p][perm[p]];
            matched = std::max(matched, agree);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        std::vector<bool> row_used(k, false), col_used(k, false);
        for (std::size_t step = 0; step < k; ++step) {
            long best = -1;
            std::size_t br = 0, bc = 0;
            for (std::size_t r = 0; r < k; ++r) {
                if (row_used[r]) continue;
                for (std::size_t c = 0; c < k; ++c) {
                    if (!col_used[c] && confusion[r][c] > best) {
                        best = confusion[r][c];
                        br = r;
                        bc = c;
                    }
                }
            }
            row_used[br] = col_used[bc] = true;
            matched += best;
        }
    }
    const auto n = static_cast<double>(truth.size());
    return 100.0 * (n - static_cast<double>(matched)) / n;
}

double intra_cluster_inertia(const TimeSeriesDataset& data, std::span<const int> partition,
                             const Eigen::MatrixXd& means) {
    if (partition.size() != data.series_count() ||
        static_cast<std::size_t>(means.cols()) != data.length()) {
        throw Error(ErrorCode::DimensionMismatch, "partition or mean series do not match the data");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < partition.size(); ++i) {
        const int z = partition[i];
        if (z < 1 || z > means.rows()) {
            throw Error(ErrorCode::LabelOutOfRange, "partition label outside 1..K");
        }
        total += (data.values().row(static_cast<Eigen::Index>(i)) - means.row(z - 1)).squaredNorm();
    }
    return total;
}

double round_percentage(double pct) { return std::round(pct * 100.0) / 100.0; }

}  // namespace regclust
