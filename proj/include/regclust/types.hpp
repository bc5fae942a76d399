#pragma once

// Shared data model: time grids, datasets and model structure descriptors.
//
// Cluster, regime and series indices are 0-based in the C++ API. Every file
// format and every label vector handed to or produced for users (partitions,
// true labels, segment numbers) is 1-based.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "regclust/errors.hpp"

namespace regclust {

/// Strictly increasing sequence of m >= 2 finite time stamps.
class TimeGrid {
public:
    explicit TimeGrid(Eigen::VectorXd values);
    explicit TimeGrid(const std::vector<double>& values);

    /// Regular grid start, start + step, ... with `count` points.
    static TimeGrid regular(double start, double step, std::size_t count);

    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }
    double front() const { return values_[0]; }
    double back() const { return values_[values_.size() - 1]; }
    const Eigen::VectorXd& values() const { return values_; }

private:
    Eigen::VectorXd values_;
};

/// Affine map u = (t - offset) / scale applied to time before any polynomial
/// or gating evaluation. The identity map keeps raw time.
struct TimeScaling {
    double offset = 0.0;
    double scale = 1.0;

    static TimeScaling identity() { return {}; }
    /// Maps [t_1, t_m] onto [0, 1].
    static TimeScaling unit_interval(const TimeGrid& grid);

    double apply(double t) const { return (t - offset) / scale; }
    double invert(double u) const { return u * scale + offset; }
    Eigen::VectorXd apply(const Eigen::VectorXd& t) const;
    bool is_identity() const { return offset == 0.0 && scale == 1.0; }
};

enum class VarianceMode { Free, CommonPerCluster, CommonGlobal };
enum class GatingMode { PerCluster, Shared };

std::string to_string(VarianceMode mode);
std::string to_string(GatingMode mode);
VarianceMode parse_variance_mode(const std::string& text);
GatingMode parse_gating_mode(const std::string& text);

/// Number of clusters, regimes and polynomial degree, plus the parsimony
/// constraints applied in the M-step.
struct ModelStructure {
    int clusters = 1;
    int segments = 1;
    int degree = 0;
    VarianceMode variance_mode = VarianceMode::Free;
    GatingMode gating_mode = GatingMode::PerCluster;

    /// Throws InvalidStructure when K < 1, L < 1 or p < 0.
    void validate() const;
    int coefficient_count() const { return degree + 1; }
    bool operator==(const ModelStructure&) const = default;
};

struct ValidationResult {
    bool ok = true;
    std::optional<ErrorCode> code;
    /// 1-based position of the first violation (grid point or series).
    std::size_t index = 0;
    std::string message;

    explicit operator bool() const { return ok; }
};

/// Checks raw, possibly ragged input before it becomes a dataset.
ValidationResult validate_dataset(const std::vector<double>& grid,
                                  const std::vector<std::vector<double>>& series);

/// n series of length m on one shared grid. True labels are optional
/// evaluation metadata; fitting code never reads them.
class TimeSeriesDataset {
public:
    TimeSeriesDataset(TimeGrid grid, Eigen::MatrixXd values,
                      std::optional<std::vector<int>> true_labels = std::nullopt);

    /// Validates ragged input and throws the first violation as an Error.
    static TimeSeriesDataset from_rows(const std::vector<double>& grid,
                                       const std::vector<std::vector<double>>& series,
                                       std::optional<std::vector<int>> true_labels = std::nullopt);

    const TimeGrid& grid() const { return grid_; }
    /// n x m, one series per row.
    const Eigen::MatrixXd& values() const { return values_; }
    std::size_t series_count() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t length() const { return static_cast<std::size_t>(values_.cols()); }
    const std::optional<std::vector<int>>& true_labels() const { return true_labels_; }

    TimeSeriesDataset with_labels(std::vector<int> labels) const;
    TimeSeriesDataset without_labels() const;

    /// Variance of all n*m values pooled together.
    double pooled_variance() const;

private:
    TimeGrid grid_;
    Eigen::MatrixXd values_;
    std::optional<std::vector<int>> true_labels_;
};

/// Lower bound on every fitted variance: 1e-8 times the pooled data variance.
double variance_floor(const TimeSeriesDataset& data);

}  // namespace regclust
