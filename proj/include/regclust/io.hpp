#pragma once
// File formats: dataset CSV, labels, model JSON and long-format plot exports.
//
// Dataset CSV: the first line is the literal token `t` followed by the m grid
// values; every other line is `series_<i>` followed by m values. Labels are
// one integer per line. Doubles are written with 17 significant digits so a
// write/read cycle is exact.
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "regclust/hpr_mixture.hpp"
#include "regclust/model_selection.hpp"
#include "regclust/models.hpp"
#include "regclust/types.hpp"

namespace regclust {

/// Shortest-looking but lossless text for a double ("%.17g" semantics,
/// locale independent).
std::string format_double(double value);
/// Parses a full string as a double; throws NonFiniteValue / IoError.
double parse_double(const std::string& text);

void write_dataset_csv(std::ostream& out, const TimeSeriesDataset& data);
TimeSeriesDataset read_dataset_csv(std::istream& in);
void save_dataset(const std::filesystem::path& path, const TimeSeriesDataset& data);
TimeSeriesDataset load_dataset(const std::filesystem::path& path);

void write_labels(std::ostream& out, const std::vector<int>& labels);
std::vector<int> read_labels(std::istream& in);
void save_labels(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> load_labels(const std::filesystem::path& path);

using AnyModel = std::variant<HprMixtureModel, RegMixtureModel>;

inline constexpr int kModelFormatVersion = 1;

/// JSON document with format_version, kind ("hpr" or "regmix"), structure,
/// time_scaling and all parameters as 17-digit decimal strings.
std::string model_to_json(const HprMixtureModel& model);
std::string model_to_json(const RegMixtureModel& model);
AnyModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

/// Long-format exports, one row per (cluster, t) or (cluster, regime, t).
void write_mean_series_csv(std::ostream& out, const Eigen::MatrixXd& means, const TimeGrid& grid);
void write_gates_csv(std::ostream& out, const HprMixtureModel& model, const TimeGrid& grid);
void write_polynomials_csv(std::ostream& out, const HprMixtureModel& model, const TimeGrid& grid);
void write_segmentation_csv(std::ostream& out, const HprMixtureModel& model, const TimeGrid& grid);
void write_partition_csv(std::ostream& out, const std::vector<int>& partition,
                         const Eigen::MatrixXd& responsibilities);
void write_selection_csv(std::ostream& out, const SelectionReport& report);

/// Writes `content` to `path`, creating parent directories; IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace regclust
