// regclust: simulate, fit, select and evaluate curve-clustering models.
//
// Exit codes: 0 success, 2 usage, 3 data or I/O error, 4 numerical failure,
// 5 internal error.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "regclust/hpr_mixture.hpp"
#include "regclust/io.hpp"
#include "regclust/metrics.hpp"
#include "regclust/model_selection.hpp"
#include "regclust/reg_mixture.hpp"
#include "regclust/study.hpp"
#include "regclust/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regclust;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitInternal = 5;

struct Common {
    std::string output_dir = ".";
    std::string model = "hpr";
    int clusters = 2;
    int segments = 3;
    int degree = 3;
    int restarts = 20;
    std::uint64_t seed = 1;
    std::string variance_mode = "free";
    std::string gating_mode = "per-cluster";
    std::string normalize_time = "on";
    double tol = 1e-8;
    int max_iters = 500;
    int threads = 0;

    EmOptions em() const {
        EmOptions o;
        o.restarts = restarts;
        o.seed = seed;
        o.tol = tol;
        o.max_iters = max_iters;
        o.threads = threads;
        o.normalize_time = normalize_time == "on";
        o.validate();
        return o;
    }
    ModelStructure structure() const {
        ModelStructure s{clusters, segments, degree, parse_variance_mode(variance_mode),
                         parse_gating_mode(gating_mode)};
        s.validate();
        return s;
    }
};

void add_output_dir(CLI::App* cmd, Common& c) {
    cmd->add_option("--output-dir", c.output_dir, "Directory for all output files")
        ->envname("REGCLUST_OUTPUT_DIR")
        ->capture_default_str();
}

void add_em_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--restarts", c.restarts, "EM restarts per fit")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    cmd->add_option("--tol", c.tol, "Relative log-likelihood tolerance")->capture_default_str();
    cmd->add_option("--max-iters", c.max_iters, "EM iteration cap")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker cap (0 = all cores)")->capture_default_str();
    cmd->add_option("--normalize-time", c.normalize_time, "Map time onto [0, 1] before fitting")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
}

void add_structure_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--model", c.model, "Model family")
        ->check(CLI::IsMember({"hpr", "regmix"}))
        ->capture_default_str();
    cmd->add_option("--variance-mode", c.variance_mode, "Variance constraint")
        ->check(CLI::IsMember({"free", "cluster", "global"}))
        ->capture_default_str();
    cmd->add_option("--gating-mode", c.gating_mode, "Gating constraint")
        ->check(CLI::IsMember({"per-cluster", "shared"}))
        ->capture_default_str();
}

fs::path out_path(const Common& c, const std::string& name) { return fs::path(c.output_dir) / name; }

std::string csv_text(const std::function<void(std::ostream&)>& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

json report_json(const EmFitReport& r) {
    json j;
    j["final_log_likelihood"] = format_double(r.final_log_likelihood);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["best_restart"] = r.restart_index + 1;
    json trace = json::array();
    for (double v : r.loglik_trace) trace.push_back(format_double(v));
    j["loglik_trace"] = trace;
    json restarts = json::array();
    for (std::size_t i = 0; i < r.restarts.size(); ++i) {
        const RestartOutcome& o = r.restarts[i];
        json e{{"restart", i + 1}, {"seed", o.seed}, {"failed", o.failed}};
        if (o.failed) {
            e["failure"] = o.failure;
        } else {
            e["log_likelihood"] = format_double(o.log_likelihood);
            e["iterations"] = o.iterations;
            e["converged"] = o.converged;
        }
        restarts.push_back(e);
    }
    j["restarts"] = restarts;
    j["warnings"] = r.warnings;
    return j;
}

GenerativeSpec simulation_spec(double sigma2, std::uint64_t seed, int n, const std::string& mode) {
    GenerativeSpec spec = table1_spec(sigma2, seed);
    spec.n = n;
    spec.mode = mode == "per-point" ? GenerationMode::PerPointRegime : GenerationMode::DeterministicMean;
    return spec;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string preset = "table1";
    double sigma2 = 1.0;
    int n = 50;
    std::string mode = "deterministic";
};

int run_simulate(const Common& c, const SimulateArgs& a) {
    const GenerativeSpec spec = simulation_spec(a.sigma2, c.seed, a.n, a.mode);
    const SyntheticSample sample = generate(spec);
    save_dataset(out_path(c, "dataset.csv"), sample.data);
    save_labels(out_path(c, "labels.txt"), *sample.data.true_labels());

    json echo;
    echo["preset"] = a.preset;
    echo["sigma2"] = format_double(a.sigma2);
    echo["seed"] = c.seed;
    echo["n"] = spec.n;
    echo["m"] = spec.grid.size();
    echo["generation_mode"] = a.mode;
    echo["proportions"] = json::array();
    for (Eigen::Index k = 0; k < spec.proportions.size(); ++k) {
        echo["proportions"].push_back(format_double(spec.proportions[k]));
    }
    json clusters = json::array();
    for (const ClusterSpec& cs : spec.clusters) {
        json cj;
        json coef = json::array();
        for (Eigen::Index r = 0; r < cs.coefficients.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index l = 0; l < cs.coefficients.cols(); ++l) {
                row.push_back(format_double(cs.coefficients(r, l)));
            }
            coef.push_back(row);
        }
        cj["coefficients"] = coef;
        if (cs.gating) {
            json g = json::array();
            const auto& gc = cs.gating->coefficients();
            for (Eigen::Index l = 0; l < gc.rows(); ++l) {
                g.push_back({format_double(gc(l, 0)), format_double(gc(l, 1))});
            }
            cj["gating"] = g;
        }
        cj["variances"] = json::array();
        for (Eigen::Index l = 0; l < cs.variances.size(); ++l) {
            cj["variances"].push_back(format_double(cs.variances[l]));
        }
        clusters.push_back(cj);
    }
    echo["clusters"] = clusters;
    write_text_file(out_path(c, "spec.json"), echo.dump(2) + "\n");
    std::cout << "wrote " << spec.n << " series of length " << spec.grid.size() << " to "
              << c.output_dir << "\n";
    return 0;
}

// ---- fit --------------------------------------------------------------------

int run_fit(const Common& c, const std::string& input) {
    const TimeSeriesDataset data = load_dataset(input);
    const EmOptions options = c.em();
    if (c.model == "regmix") {
        const RegMixFit fit = regmix_fit_em(data, c.clusters, c.degree, options);
        const auto part = map_partition(fit.report.posteriors_r);
        save_model(out_path(c, "model.json"), fit.model);
        write_text_file(out_path(c, "report.json"), report_json(fit.report).dump(2) + "\n");
        write_text_file(out_path(c, "partition.csv"), csv_text([&](std::ostream& o) {
                            write_partition_csv(o, part, fit.report.posteriors_r);
                        }));
        write_text_file(out_path(c, "mean_series.csv"), csv_text([&](std::ostream& o) {
                            write_mean_series_csv(o, regmix_mean_series(fit.model, data.grid()),
                                                  data.grid());
                        }));
        std::cout << "log-likelihood " << format_double(fit.report.final_log_likelihood) << "\n";
        return 0;
    }
    const HprFit fit = hpr_fit_em(data, c.structure(), options);
    const auto part = map_partition(fit.report.posteriors_r);
    save_model(out_path(c, "model.json"), fit.model);
    write_text_file(out_path(c, "report.json"), report_json(fit.report).dump(2) + "\n");
    write_text_file(out_path(c, "partition.csv"), csv_text([&](std::ostream& o) {
                        write_partition_csv(o, part, fit.report.posteriors_r);
                    }));
    write_text_file(out_path(c, "mean_series.csv"), csv_text([&](std::ostream& o) {
                        write_mean_series_csv(o, mean_series(fit.model, data.grid()), data.grid());
                    }));
    write_text_file(out_path(c, "segmentation.csv"), csv_text([&](std::ostream& o) {
                        write_segmentation_csv(o, fit.model, data.grid());
                    }));
    write_text_file(out_path(c, "gates.csv"), csv_text([&](std::ostream& o) {
                        write_gates_csv(o, fit.model, data.grid());
                    }));
    write_text_file(out_path(c, "polynomials.csv"), csv_text([&](std::ostream& o) {
                        write_polynomials_csv(o, fit.model, data.grid());
                    }));
    std::cout << "log-likelihood " << format_double(fit.report.final_log_likelihood) << "\n";
    return 0;
}

// ---- select -----------------------------------------------------------------

struct SelectArgs {
    std::string input;
    int k_min = 1, k_max = 3;
    int l_min = 1, l_max = 4;
    int p_min = 1, p_max = 4;
    std::string penalty = "series";
    int replicates = 0;
    double sigma2 = 2.0;
};

SelectionReport select_once(const Common& c, const SelectArgs& a, const TimeSeriesDataset& data) {
    SelectionGrid grid;
    grid.clusters = {a.k_min, a.k_max};
    grid.segments = {a.l_min, a.l_max};
    grid.degrees = {a.p_min, a.p_max};
    grid.variance_mode = parse_variance_mode(c.variance_mode);
    grid.gating_mode = parse_gating_mode(c.gating_mode);
    grid.penalty = a.penalty == "observations" ? PenaltySize::Observations : PenaltySize::Series;
    return c.model == "regmix" ? select_regmix(data, grid, c.em()) : select(data, grid, c.em());
}

json winner_json(const SelectionReport& report) {
    const SelectionCell& w = report.best();
    json j{{"model", report.baseline ? "regmix" : "hpr"},
           {"K", w.structure.clusters},
           {"p", w.structure.degree},
           {"log_likelihood", format_double(w.log_likelihood)},
           {"parameters", w.parameters},
           {"bic", format_double(w.bic)},
           {"converged", w.converged},
           {"warnings", report.warnings}};
    if (!report.baseline) j["L"] = w.structure.segments;
    return j;
}

int run_select(const Common& c, const SelectArgs& a) {
    if (a.replicates <= 0) {
        if (a.input.empty()) {
            throw CLI::ValidationError("--input", "select needs --input or --replicates");
        }
        const TimeSeriesDataset data = load_dataset(a.input);
        const SelectionReport report = select_once(c, a, data);
        write_text_file(out_path(c, "selection.csv"),
                        csv_text([&](std::ostream& o) { write_selection_csv(o, report); }));
        write_text_file(out_path(c, "winner.json"), winner_json(report).dump(2) + "\n");
        const auto& w = report.best().structure;
        std::cout << "winner K=" << w.clusters;
        if (!report.baseline) std::cout << " L=" << w.segments;
        std::cout << " p=" << w.degree << "\n";
        return 0;
    }

    // Replicate mode: re-simulate the benchmark R times and tally winners.
    std::map<std::tuple<int, int, int>, int> tally;
    std::ostringstream winners;
    winners << "replicate,K,L,p,bic\n";
    bool baseline = c.model == "regmix";
    for (int r = 0; r < a.replicates; ++r) {
        const auto data =
            generate(simulation_spec(a.sigma2, replicate_seed(c.seed, r), 50, "deterministic")).data;
        const SelectionReport report = select_once(c, a, data);
        const auto& w = report.best();
        const int l = baseline ? 1 : w.structure.segments;
        ++tally[{w.structure.clusters, l, w.structure.degree}];
        winners << r + 1 << ',' << w.structure.clusters << ',' << l << ',' << w.structure.degree
                << ',' << format_double(w.bic) << '\n';
    }
    std::ostringstream rates;
    rates << "K,L,p,selections,percent\n";
    std::tuple<int, int, int> modal{};
    int modal_count = -1;
    for (const auto& [cell, count] : tally) {
        rates << std::get<0>(cell) << ',' << std::get<1>(cell) << ',' << std::get<2>(cell) << ','
              << count << ',' << format_double(100.0 * count / a.replicates) << '\n';
        if (count > modal_count) {
            modal_count = count;
            modal = cell;
        }
    }
    write_text_file(out_path(c, "selection_rates.csv"), rates.str());
    write_text_file(out_path(c, "replicate_winners.csv"), winners.str());
    std::cout << "modal winner K=" << std::get<0>(modal);
    if (!baseline) std::cout << " L=" << std::get<1>(modal);
    std::cout << " p=" << std::get<2>(modal) << " (" << modal_count << "/" << a.replicates << ")\n";
    return 0;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string input;
    std::string labels;
    std::vector<std::string> model_files;
    std::vector<double> sweep;
    int replicates = 10;
    int baseline_degree = 10;
};

int run_evaluate(const Common& c, const EvaluateArgs& a) {
    const ModelStructure structure = c.structure();
    if (!a.sweep.empty()) {
        std::ostringstream summary, raw;
        summary << "sigma2,method,misclassification_pct,inertia\n";
        raw << "sigma2,replicate,method,misclassification_pct,inertia,log_likelihood\n";
        for (double sigma2 : a.sweep) {
            std::vector<Comparison> runs;
            for (int r = 0; r < a.replicates; ++r) {
                const auto data =
                    generate(simulation_spec(sigma2, replicate_seed(c.seed, r), 50, "deterministic"))
                        .data;
                runs.push_back(compare_methods(data, structure, a.baseline_degree, c.em()));
                for (const auto& [name, s] : {std::pair{"proposed", runs.back().proposed},
                                              std::pair{"baseline", runs.back().baseline}}) {
                    raw << format_double(sigma2) << ',' << r + 1 << ',' << name << ','
                        << format_double(s.misclassification_pct) << ',' << format_double(s.inertia)
                        << ',' << format_double(s.log_likelihood) << '\n';
                }
            }
            const Comparison avg = average(runs);
            summary << format_double(sigma2) << ",proposed,"
                    << format_double(avg.proposed.misclassification_pct) << ','
                    << format_double(avg.proposed.inertia) << '\n';
            summary << format_double(sigma2) << ",baseline,"
                    << format_double(avg.baseline.misclassification_pct) << ','
                    << format_double(avg.baseline.inertia) << '\n';
        }
        write_text_file(out_path(c, "sweep.csv"), summary.str());
        write_text_file(out_path(c, "sweep_replicates.csv"), raw.str());
        std::cout << "wrote sweep over " << a.sweep.size() << " noise levels\n";
        return 0;
    }

    if (a.input.empty()) throw CLI::ValidationError("--input", "evaluate needs --input or --sweep");
    if (a.labels.empty()) throw Error(ErrorCode::MissingLabels, "evaluate needs --labels");
    TimeSeriesDataset data = load_dataset(a.input);
    const std::vector<int> labels = load_labels(a.labels);
    if (labels.size() != data.series_count()) {
        throw Error(ErrorCode::DimensionMismatch, "labels file has " + std::to_string(labels.size()) +
                                                      " rows for " +
                                                      std::to_string(data.series_count()) + " series");
    }
    data = data.with_labels(labels);

    std::ostringstream out;
    out << "method,source,misclassification_pct,inertia,log_likelihood\n";
    if (a.model_files.empty()) {
        const Comparison cmp = compare_methods(data, structure, a.baseline_degree, c.em());
        for (const auto& [name, s] :
             {std::pair{"proposed", cmp.proposed}, std::pair{"baseline", cmp.baseline}}) {
            out << name << ",fitted," << format_double(s.misclassification_pct) << ','
                << format_double(s.inertia) << ',' << format_double(s.log_likelihood) << '\n';
        }
    }
    for (const std::string& file : a.model_files) {
        const AnyModel any = load_model(file);
        std::vector<int> part;
        Eigen::MatrixXd means;
        double loglik = 0.0;
        int k_count = 0;
        std::string name;
        if (const auto* h = std::get_if<HprMixtureModel>(&any)) {
            const Posteriors post = e_step(*h, data);
            part = map_partition(post.r);
            means = mean_series(*h, data.grid());
            loglik = post.log_likelihood;
            k_count = h->clusters();
            name = "hpr";
        } else {
            const auto& g = std::get<RegMixtureModel>(any);
            part = map_partition(regmix_posteriors(g, data));
            means = regmix_mean_series(g, data.grid());
            loglik = regmix_log_likelihood(g, data);
            k_count = g.clusters();
            name = "regmix";
        }
        int label_max = 1;
        for (int z : labels) label_max = std::max(label_max, z);
        const int k_eval = std::max(k_count, label_max);
        out << name << ',' << file << ',' << format_double(misclassification_pct(labels, part, k_eval))
            << ',' << format_double(intra_cluster_inertia(data, part, means)) << ','
            << format_double(loglik) << '\n';
    }
    write_text_file(out_path(c, "metrics.csv"), out.str());
    std::cout << out.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-based clustering of time series with regime changes"};
    app.set_config("--config", "", "TOML or INI file with option defaults");
    app.require_subcommand(1);

    Common common;
    SimulateArgs sim;
    SelectArgs sel;
    EvaluateArgs ev;
    std::string fit_input;

    auto* simulate = app.add_subcommand("simulate", "Generate a labeled benchmark dataset");
    add_output_dir(simulate, common);
    simulate->add_option("--preset", sim.preset, "Generative preset")
        ->check(CLI::IsMember({"table1"}))
        ->capture_default_str();
    simulate->add_option("--sigma2", sim.sigma2, "Noise variance")->capture_default_str();
    simulate->add_option("--n", sim.n, "Number of series")->capture_default_str();
    simulate->add_option("--seed", common.seed, "Generator seed")->capture_default_str();
    simulate->add_option("--generation-mode", sim.mode, "Noise model")
        ->check(CLI::IsMember({"deterministic", "per-point"}))
        ->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Fit one model and export its curves");
    add_output_dir(fit, common);
    fit->add_option("--input", fit_input, "Dataset CSV")->required();
    add_structure_options(fit, common);
    fit->add_option("--K", common.clusters, "Clusters")->capture_default_str();
    fit->add_option("--L", common.segments, "Regimes per cluster")->capture_default_str();
    fit->add_option("--p", common.degree, "Polynomial degree")->capture_default_str();
    add_em_options(fit, common);

    auto* selectc = app.add_subcommand("select", "BIC grid search over model sizes");
    add_output_dir(selectc, common);
    selectc->add_option("--input", sel.input, "Dataset CSV");
    add_structure_options(selectc, common);
    selectc->add_option("--K-min", sel.k_min)->capture_default_str();
    selectc->add_option("--K-max", sel.k_max)->capture_default_str();
    selectc->add_option("--L-min", sel.l_min)->capture_default_str();
    selectc->add_option("--L-max", sel.l_max)->capture_default_str();
    selectc->add_option("--p-min", sel.p_min)->capture_default_str();
    selectc->add_option("--p-max", sel.p_max)->capture_default_str();
    selectc->add_option("--penalty", sel.penalty, "BIC sample size")
        ->check(CLI::IsMember({"series", "observations"}))
        ->capture_default_str();
    selectc->add_option("--replicates", sel.replicates,
                        "Simulate this many benchmark datasets and report selection rates")
        ->capture_default_str();
    selectc->add_option("--sigma2", sel.sigma2, "Noise variance in replicate mode")
        ->capture_default_str();
    add_em_options(selectc, common);

    auto* evaluate = app.add_subcommand("evaluate", "Score partitions against true labels");
    add_output_dir(evaluate, common);
    evaluate->add_option("--input", ev.input, "Dataset CSV");
    evaluate->add_option("--labels", ev.labels, "True labels, one per line");
    evaluate->add_option("--model-file", ev.model_files, "Fitted model JSON (repeatable)");
    evaluate->add_option("--sweep", ev.sweep, "Noise variances for a simulated sweep")
        ->delimiter(',');
    evaluate->add_option("--replicates", ev.replicates, "Datasets per noise level")
        ->capture_default_str();
    evaluate->add_option("--baseline-p", ev.baseline_degree, "Baseline polynomial degree")
        ->capture_default_str();
    add_structure_options(evaluate, common);
    evaluate->add_option("--K", common.clusters)->capture_default_str();
    evaluate->add_option("--L", common.segments)->capture_default_str();
    evaluate->add_option("--p", common.degree)->capture_default_str();
    add_em_options(evaluate, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*simulate) return run_simulate(common, sim);
        if (*fit) return run_fit(common, fit_input);
        if (*selectc) return run_select(common, sel);
        if (*evaluate) return run_evaluate(common, ev);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (category_of(e.code())) {
            case ErrorCategory::Data: return kExitData;
            case ErrorCategory::Numerical: return kExitNumerical;
            case ErrorCategory::Internal: return kExitInternal;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
