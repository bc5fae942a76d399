#include "regclust/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace regclust {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + '"';
}

json number(double v) { return format_double(v); }

double number_from(const json& j) {
    if (j.is_string()) return parse_double(j.get<std::string>());
    if (j.is_number()) return j.get<double>();
    throw Error(ErrorCode::IoError, "expected a number or decimal string in model JSON");
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

Eigen::VectorXd vector_from(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::IoError, "expected an array in model JSON");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from(j[i]);
    return v;
}

// Row-major nested arrays.
json matrix_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
    return a;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw Error(ErrorCode::IoError, "matrix in model JSON has the wrong number of rows");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::VectorXd row = vector_from(j[static_cast<std::size_t>(r)]);
        if (row.size() != cols) {
            throw Error(ErrorCode::IoError, "matrix in model JSON has a row of the wrong width");
        }
        m.row(r) = row.transpose();
    }
    return m;
}

json scaling_json(const TimeScaling& s) {
    return json{{"offset", number(s.offset)}, {"scale", number(s.scale)}};
}

TimeScaling scaling_from(const json& j) {
    return TimeScaling{number_from(j.at("offset")), number_from(j.at("scale"))};
}

const json& field(const json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw Error(ErrorCode::IoError, std::string("model JSON lacks field '") + key + "'");
    }
    return doc.at(key);
}

}  // namespace

std::string format_double(double value) {
    if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteValue, "cannot format a non-finite value");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || s.empty()) {
        throw Error(ErrorCode::IoError, "cannot parse '" + s + "' as a number");
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "value '" + s + "' is not finite");
    return v;
}

// ---- dataset ----------------------------------------------------------------

void write_dataset_csv(std::ostream& out, const TimeSeriesDataset& data) {
    out << 't';
    for (std::size_t j = 0; j < data.length(); ++j) out << ',' << format_double(data.grid()[j]);
    out << '\n';
    for (std::size_t i = 0; i < data.series_count(); ++i) {
        out << "series_" << i + 1;
        for (std::size_t j = 0; j < data.length(); ++j) {
            out << ',' << format_double(data.values()(static_cast<Eigen::Index>(i),
                                                      static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
}

TimeSeriesDataset read_dataset_csv(std::istream& in) {
    std::string line;
    std::vector<double> grid;
    std::vector<std::vector<double>> series;
    bool have_grid = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(trim(line));
        std::vector<double> values;
        values.reserve(fields.size());
        for (std::size_t f = 1; f < fields.size(); ++f) {
            try {
                values.push_back(parse_double(fields[f]));
            } catch (const Error& e) {
                throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (!have_grid) {
            if (trim(fields.front()) != "t") {
                throw Error(ErrorCode::IoError, "dataset CSV must start with a 't' grid line");
            }
            grid = std::move(values);
            have_grid = true;
        } else {
            series.push_back(std::move(values));
        }
    }
    if (!have_grid) throw Error(ErrorCode::IoError, "dataset CSV is empty");
    return TimeSeriesDataset::from_rows(grid, series);
}

void save_dataset(const std::filesystem::path& path, const TimeSeriesDataset& data) {
    std::ostringstream out;
    write_dataset_csv(out, data);
    write_text_file(path, out.str());
}

TimeSeriesDataset load_dataset(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    return read_dataset_csv(in);
}

// ---- labels -----------------------------------------------------------------

void write_labels(std::ostream& out, const std::vector<int>& labels) {
    for (int z : labels) out << z << '\n';
}

std::vector<int> read_labels(std::istream& in) {
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        const std::string s = trim(line);
        if (s.empty()) continue;
        int z = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), z);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw Error(ErrorCode::IoError, "bad label '" + s + "'");
        }
        labels.push_back(z);
    }
    return labels;
}

void save_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ostringstream out;
    write_labels(out, labels);
    write_text_file(path, out.str());
}

std::vector<int> load_labels(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    return read_labels(in);
}

// ---- models -----------------------------------------------------------------

std::string model_to_json(const HprMixtureModel& model) {
    const ModelStructure& s = model.structure();
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["kind"] = "hpr";
    doc["structure"] = {{"clusters", s.clusters},
                        {"segments", s.segments},
                        {"degree", s.degree},
                        {"variance_mode", to_string(s.variance_mode)},
                        {"gating_mode", to_string(s.gating_mode)}};
    doc["time_scaling"] = scaling_json(model.scaling());
    doc["proportions"] = vector_json(model.proportions());
    json clusters = json::array();
    for (int k = 0; k < model.clusters(); ++k) {
        clusters.push_back({{"gating", matrix_json(model.gating(k).coefficients())},
                            {"coefficients", matrix_json(model.coefficients(k))},
                            {"variances", vector_json(model.variances().row(k).transpose())}});
    }
    doc["clusters"] = clusters;
    return doc.dump(2) + "\n";
}

std::string model_to_json(const RegMixtureModel& model) {
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["kind"] = "regmix";
    doc["structure"] = {{"clusters", model.clusters()}, {"degree", model.degree()}};
    doc["time_scaling"] = scaling_json(model.scaling());
    doc["proportions"] = vector_json(model.proportions());
    doc["coefficients"] = matrix_json(model.coefficients());
    doc["variances"] = vector_json(model.variances());
    return doc.dump(2) + "\n";
}

AnyModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("model JSON does not parse: ") + e.what());
    }
    try {
        const int version = field(doc, "format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(ErrorCode::IoError,
                        "unsupported model format_version " + std::to_string(version));
        }
        const std::string kind = field(doc, "kind").get<std::string>();
        const json& st = field(doc, "structure");
        const TimeScaling scaling = scaling_from(field(doc, "time_scaling"));
        const Eigen::VectorXd proportions = vector_from(field(doc, "proportions"));
        if (kind == "regmix") {
            const int k_count = st.at("clusters").get<int>();
            const int degree = st.at("degree").get<int>();
            return RegMixtureModel(degree, scaling, proportions,
                                   matrix_from(field(doc, "coefficients"), degree + 1, k_count),
                                   vector_from(field(doc, "variances")));
        }
        if (kind != "hpr") throw Error(ErrorCode::IoError, "unknown model kind '" + kind + "'");
        ModelStructure s;
        s.clusters = st.at("clusters").get<int>();
        s.segments = st.at("segments").get<int>();
        s.degree = st.at("degree").get<int>();
        s.variance_mode = parse_variance_mode(st.at("variance_mode").get<std::string>());
        s.gating_mode = parse_gating_mode(st.at("gating_mode").get<std::string>());
        s.validate();
        const json& cl = field(doc, "clusters");
        if (!cl.is_array() || static_cast<int>(cl.size()) != s.clusters) {
            throw Error(ErrorCode::IoError, "model JSON cluster list does not match K");
        }
        std::vector<GatingParameters> gating;
        std::vector<Eigen::MatrixXd> coefficients;
        Eigen::MatrixXd variances(s.clusters, s.segments);
        for (int k = 0; k < s.clusters; ++k) {
            const json& c = cl[static_cast<std::size_t>(k)];
            gating.emplace_back(matrix_from(c.at("gating"), s.segments, 2));
            coefficients.push_back(matrix_from(c.at("coefficients"), s.degree + 1, s.segments));
            const Eigen::VectorXd v = vector_from(c.at("variances"));
            if (v.size() != s.segments) {
                throw Error(ErrorCode::IoError, "model JSON variances do not match L");
            }
            variances.row(k) = v.transpose();
        }
        return HprMixtureModel(s, scaling, proportions, std::move(gating), std::move(coefficients),
                               std::move(variances));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("malformed model JSON: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
    write_text_file(path, std::visit([](const auto& m) { return model_to_json(m); }, model));
}

AnyModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_text_file(path));
}

// ---- plot exports -----------------------------------------------------------

void write_mean_series_csv(std::ostream& out, const Eigen::MatrixXd& means, const TimeGrid& grid) {
    out << "cluster,t,mean\n";
    for (Eigen::Index k = 0; k < means.rows(); ++k) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            out << k + 1 << ',' << format_double(grid[j]) << ','
                << format_double(means(k, static_cast<Eigen::Index>(j))) << '\n';
        }
    }
}

void write_gates_csv(std::ostream& out, const HprMixtureModel& model, const TimeGrid& grid) {
    out << "cluster,regime,t,probability\n";
    const Eigen::VectorXd times = model.scaling().apply(grid.values());
    for (int k = 0; k < model.clusters(); ++k) {
        const Eigen::MatrixXd gates = logistic_proportions(model.gating(k), times);
        for (int l = 0; l < model.segments(); ++l) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                out << k + 1 << ',' << l + 1 << ',' << format_double(grid[j]) << ','
                    << format_double(gates(static_cast<Eigen::Index>(j), l)) << '\n';
            }
        }
    }
}

void write_polynomials_csv(std::ostream& out, const HprMixtureModel& model, const TimeGrid& grid) {
    out << "cluster,regime,t,value\n";
    for (int k = 0; k < model.clusters(); ++k) {
        for (int l = 0; l < model.segments(); ++l) {
            const Eigen::VectorXd curve = regime_curve(model, k, l, grid);
            for (std::size_t j = 0; j < grid.size(); ++j) {
                out << k + 1 << ',' << l + 1 << ',' << format_double(grid[j]) << ','
                    << format_double(curve[static_cast<Eigen::Index>(j)]) << '\n';
            }
        }
    }
}

void write_segmentation_csv(std::ostream& out, const HprMixtureModel& model, const TimeGrid& grid) {
    out << "cluster,regime,start_index,end_index,t_start,t_end\n";
    for (int k = 0; k < model.clusters(); ++k) {
        const Segmentation seg = segment(model, k, grid);
        for (int l = 0; l < model.segments(); ++l) {
            const auto& iv = seg.intervals[static_cast<std::size_t>(l)];
            out << k + 1 << ',' << l + 1 << ',';
            if (iv) {
                out << iv->first + 1 << ',' << iv->second + 1 << ',' << format_double(grid[iv->first])
                    << ',' << format_double(grid[iv->second]) << '\n';
            } else {
                out << ",,,\n";
            }
        }
    }
}

void write_partition_csv(std::ostream& out, const std::vector<int>& partition,
                         const Eigen::MatrixXd& responsibilities) {
    out << "series,cluster";
    for (Eigen::Index k = 0; k < responsibilities.cols(); ++k) out << ",r_" << k + 1;
    out << '\n';
    for (std::size_t i = 0; i < partition.size(); ++i) {
        out << i + 1 << ',' << partition[i];
        for (Eigen::Index k = 0; k < responsibilities.cols(); ++k) {
            out << ',' << format_double(responsibilities(static_cast<Eigen::Index>(i), k));
        }
        out << '\n';
    }
}

void write_selection_csv(std::ostream& out, const SelectionReport& report) {
    out << "K,L,p,variance_mode,gating_mode,feasible,fitted,converged,log_likelihood,parameters,bic,winner,note\n";
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const SelectionCell& cell = report.cells[c];
        out << cell.structure.clusters << ',' << cell.structure.segments << ','
            << cell.structure.degree << ',' << to_string(cell.structure.variance_mode) << ','
            << to_string(cell.structure.gating_mode) << ',' << (cell.feasible ? 1 : 0) << ','
            << (cell.fitted ? 1 : 0) << ',' << (cell.converged ? 1 : 0) << ',';
        if (cell.fitted) {
            out << format_double(cell.log_likelihood) << ',' << cell.parameters << ','
                << format_double(cell.bic);
        } else {
            out << ",,";
        }
        out << ',' << (cell.fitted && c == report.winner ? 1 : 0) << ',' << csv_field(cell.note) << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace regclust
