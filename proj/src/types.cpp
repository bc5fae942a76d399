#include "regclust/types.hpp"

#include <cmath>
#include <sstream>

namespace regclust {

namespace {

void check_grid(const Eigen::VectorXd& t) {
    if (t.size() < 2) {
        throw Error(ErrorCode::NonMonotonicGrid, "time grid needs at least two points");
    }
    for (Eigen::Index j = 0; j < t.size(); ++j) {
        if (!std::isfinite(t[j])) {
            throw Error(ErrorCode::NonFiniteValue,
                        "time stamp " + std::to_string(j + 1) + " is not finite");
        }
        if (j > 0 && !(t[j] > t[j - 1])) {
            throw Error(ErrorCode::NonMonotonicGrid,
                        "time grid not strictly increasing at position " + std::to_string(j + 1));
        }
    }
}

}  // namespace

TimeGrid::TimeGrid(Eigen::VectorXd values) : values_(std::move(values)) { check_grid(values_); }

TimeGrid::TimeGrid(const std::vector<double>& values)
    : TimeGrid(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                 static_cast<Eigen::Index>(values.size()))) {}

TimeGrid TimeGrid::regular(double start, double step, std::size_t count) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
        t[static_cast<Eigen::Index>(j)] = start + step * static_cast<double>(j);
    }
    return TimeGrid(std::move(t));
}

TimeScaling TimeScaling::unit_interval(const TimeGrid& grid) {
    return {grid.front(), grid.back() - grid.front()};
}

Eigen::VectorXd TimeScaling::apply(const Eigen::VectorXd& t) const {
    return ((t.array() - offset) / scale).matrix();
}

std::string to_string(VarianceMode mode) {
    switch (mode) {
        case VarianceMode::Free: return "free";
        case VarianceMode::CommonPerCluster: return "cluster";
        case VarianceMode::CommonGlobal: return "global";
    }
    return "free";
}

std::string to_string(GatingMode mode) {
    return mode == GatingMode::Shared ? "shared" : "per-cluster";
}

VarianceMode parse_variance_mode(const std::string& text) {
    if (text == "free") return VarianceMode::Free;
    if (text == "cluster" || text == "common_per_cluster") return VarianceMode::CommonPerCluster;
    if (text == "global" || text == "common_global") return VarianceMode::CommonGlobal;
    throw Error(ErrorCode::InvalidStructure, "unknown variance mode '" + text + "'");
}

GatingMode parse_gating_mode(const std::string& text) {
    if (text == "per-cluster" || text == "per_cluster") return GatingMode::PerCluster;
    if (text == "shared") return GatingMode::Shared;
    throw Error(ErrorCode::InvalidStructure, "unknown gating mode '" + text + "'");
}

void ModelStructure::validate() const {
    if (clusters < 1 || segments < 1 || degree < 0) {
        std::ostringstream msg;
        msg << "need K >= 1, L >= 1, p >= 0 (got K=" << clusters << ", L=" << segments
            << ", p=" << degree << ")";
        throw Error(ErrorCode::InvalidStructure, msg.str());
    }
}

ValidationResult validate_dataset(const std::vector<double>& grid,
                                  const std::vector<std::vector<double>>& series) {
    auto fail = [](ErrorCode code, std::size_t index, std::string message) {
        ValidationResult r;
        r.ok = false;
        r.code = code;
        r.index = index;
        r.message = std::move(message);
        return r;
    };
    if (grid.size() < 2) {
        return fail(ErrorCode::NonMonotonicGrid, grid.size(), "time grid needs at least two points");
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!std::isfinite(grid[j])) {
            return fail(ErrorCode::NonFiniteValue, j + 1, "non-finite time stamp");
        }
        if (j > 0 && !(grid[j] > grid[j - 1])) {
            return fail(ErrorCode::NonMonotonicGrid, j + 1, "time grid not strictly increasing");
        }
    }
    if (series.empty()) {
        return fail(ErrorCode::RaggedSeries, 0, "dataset contains no series");
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].size() != grid.size()) {
            return fail(ErrorCode::RaggedSeries, i + 1,
                        "series length " + std::to_string(series[i].size()) + " != grid length " +
                            std::to_string(grid.size()));
        }
        for (double v : series[i]) {
            if (!std::isfinite(v)) {
                return fail(ErrorCode::NonFiniteValue, i + 1, "series contains a non-finite value");
            }
        }
    }
    return {};
}

TimeSeriesDataset::TimeSeriesDataset(TimeGrid grid, Eigen::MatrixXd values,
                                     std::optional<std::vector<int>> true_labels)
    : grid_(std::move(grid)), values_(std::move(values)), true_labels_(std::move(true_labels)) {
    if (values_.rows() < 1) {
        throw Error(ErrorCode::RaggedSeries, "dataset contains no series");
    }
    if (static_cast<std::size_t>(values_.cols()) != grid_.size()) {
        throw Error(ErrorCode::RaggedSeries, "series length does not match the time grid");
    }
    if (!values_.allFinite()) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (!values_.row(i).allFinite()) {
                throw Error(ErrorCode::NonFiniteValue,
                            "series " + std::to_string(i + 1) + " contains a non-finite value");
            }
        }
    }
    if (true_labels_ && true_labels_->size() != series_count()) {
        throw Error(ErrorCode::DimensionMismatch, "label count does not match series count");
    }
}

TimeSeriesDataset TimeSeriesDataset::from_rows(const std::vector<double>& grid,
                                               const std::vector<std::vector<double>>& series,
                                               std::optional<std::vector<int>> true_labels) {
    const auto check = validate_dataset(grid, series);
    if (!check) {
        throw Error(*check.code, check.message + " (position " + std::to_string(check.index) + ")");
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(series.size()),
                           static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < series.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = series[i][j];
        }
    }
    return TimeSeriesDataset(TimeGrid(grid), std::move(values), std::move(true_labels));
}

TimeSeriesDataset TimeSeriesDataset::with_labels(std::vector<int> labels) const {
    return TimeSeriesDataset(grid_, values_, std::move(labels));
}

TimeSeriesDataset TimeSeriesDataset::without_labels() const {
    return TimeSeriesDataset(grid_, values_, std::nullopt);
}

double TimeSeriesDataset::pooled_variance() const {
    const double mean = values_.mean();
    return (values_.array() - mean).square().sum() / static_cast<double>(values_.size());
}

double variance_floor(const TimeSeriesDataset& data) {
    const double v = data.pooled_variance();
    return v > 0.0 ? 1e-8 * v : 1e-12;
}

}  // namespace regclust
